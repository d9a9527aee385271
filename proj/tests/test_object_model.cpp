#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vgc/object_model.hpp"

using namespace vgc;

namespace {

ObjectHeader fresh(double now = 0.0, AllocationInfo info = {}) {
    return make_header({0, address_of(0, 0)}, info, 1.0, now, 0.0);
}

} // namespace

TEST(Handle, AddressIsBasePlusSixteenTimesSlot) {
    EXPECT_EQ(address_of(0, 4096), 4096u);
    EXPECT_EQ(address_of(10, 0), 160u);
    for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ((address_of(i, 0x1000) - 0x1000) % kObjectAlignment, 0u);
}

TEST(Ema, WeightMustLieStrictlyInsideUnitInterval) {
    EXPECT_THROW(EmaConfig(0.0), Error);
    EXPECT_THROW(EmaConfig(1.0), Error);
    EXPECT_THROW(EmaConfig(-0.5), Error);
    EXPECT_NO_THROW(EmaConfig(0.5));
    try {
        EmaConfig bad(1.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_config);
    }
}

TEST(Ema, UpdateExamples) {
    EXPECT_DOUBLE_EQ(ema_update(2.0, 4.0, EmaConfig(0.5)), 3.0);
    for (double w : {0.01, 0.3, 0.99}) EXPECT_DOUBLE_EQ(ema_update(7.0, 7.0, EmaConfig(w)), 7.0);
}

TEST(Ema, SequenceMatchesExtendedPrecisionRecurrence) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> sample(0.0, 1000.0);
    for (double w : {0.05, 0.25, 0.5, 0.9}) {
        const EmaConfig cfg(w);
        double e = sample(rng);
        long double ref = e;
        for (int i = 0; i < 500; ++i) {
            const double x = sample(rng);
            e = ema_update(e, x, cfg);
            ref = static_cast<long double>(w) * x + (1.0L - static_cast<long double>(w)) * ref;
            ASSERT_NEAR(e, static_cast<double>(ref), 1e-12 * std::max(1.0, std::fabs(static_cast<double>(ref))));
        }
    }
}

TEST(Ema, StaysWithinSampleRange) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_real_distribution<double> wd(0.001, 0.999);
    for (int trial = 0; trial < 200; ++trial) {
        const EmaConfig cfg(wd(rng));
        double e = u(rng);
        double lo = e, hi = e;
        for (int i = 0; i < 100; ++i) {
            const double x = u(rng);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            e = ema_update(e, x, cfg);
            ASSERT_GE(e, lo - 1e-12);
            ASSERT_LE(e, hi + 1e-12);
        }
    }
}

TEST(RecordEvent, FirstAccessAtOneSecond) {
    ObjectHeader h = fresh();
    const ProfileConfig cfg;
    record_event(h, EventKind::access, 1.0, cfg);
    EXPECT_EQ(h.window_count(EventKind::access), 1u);
    EXPECT_DOUBLE_EQ(h.features.lifetime, 1.0);
    EXPECT_DOUBLE_EQ(h.features.access_rate, 1.0);
}

TEST(RecordEvent, TwoMutationsInOneWindow) {
    ObjectHeader h = fresh();
    const ProfileConfig cfg;
    record_event(h, EventKind::mutation, 0.2, cfg);
    record_event(h, EventKind::mutation, 0.7, cfg);
    EXPECT_DOUBLE_EQ(h.features.mutation_rate, 2.0);
}

TEST(RecordEvent, TenAccessesOverTwoSecondWindow) {
    ObjectHeader h = fresh();
    ProfileConfig cfg;
    cfg.window_seconds = 2.0;
    for (int i = 0; i < 10; ++i) record_event(h, EventKind::access, 0.1 + 0.18 * i, cfg);
    EXPECT_DOUBLE_EQ(h.features.access_rate, 5.0);
}

TEST(RecordEvent, RejectsDeadHeaderAndBackwardsTime) {
    ObjectHeader h = fresh();
    const ProfileConfig cfg;
    record_event(h, EventKind::access, 2.0, cfg);
    try {
        record_event(h, EventKind::access, 1.0, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_input);
    }
    h.alive = false;
    try {
        record_event(h, EventKind::access, 3.0, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::lifecycle_violation);
    }
}

TEST(RecordEvent, NeverTouchesPlacement) {
    ObjectHeader h = fresh();
    h.zone = ZoneId::blue;
    h.generation = Generation::gen1;
    h.checkpoint_index = 77;
    const ProfileConfig cfg;
    std::mt19937_64 rng(3);
    double t = 0.0;
    for (int i = 0; i < 1000; ++i) {
        t += std::uniform_real_distribution<double>(0.0, 0.5)(rng);
        record_event(h, static_cast<EventKind>(rng() % 3), t, cfg);
        ASSERT_EQ(h.zone, ZoneId::blue);
        ASSERT_EQ(h.generation, Generation::gen1);
        ASSERT_EQ(h.checkpoint_index, 77u);
    }
}

TEST(RecordEvent, LifetimeIsMonotone) {
    ObjectHeader h = fresh(5.0);
    const ProfileConfig cfg;
    double prev = 0.0;
    for (double t : {5.0, 5.5, 5.5, 7.0, 12.0}) {
        record_event(h, EventKind::access, t, cfg);
        EXPECT_GE(h.features.lifetime, prev);
        prev = h.features.lifetime;
    }
    EXPECT_DOUBLE_EQ(prev, 7.0);
}

TEST(FeatureSnapshot, NoEventsGivesZeroRatesAndAllocationAttributes) {
    AllocationInfo info;
    info.size = 128;
    info.fan_out = 3;
    const ObjectHeader h = make_header({0, 0}, info, 2.0, 0.0, 0.0);
    const FeatureVector f = feature_snapshot(h, ProfileConfig{});
    EXPECT_EQ(f.access_rate, 0.0);
    EXPECT_EQ(f.mutation_rate, 0.0);
    EXPECT_EQ(f.lambda_rate, 0.0);
    EXPECT_EQ(f.size, 128.0);
    EXPECT_EQ(f.fan_out, 3.0);
    EXPECT_EQ(f.complexity_weight, 2.0);
}

TEST(FeatureSnapshot, PureRead) {
    ObjectHeader h = fresh();
    const ProfileConfig cfg;
    for (int i = 0; i < 20; ++i) record_event(h, EventKind::access, 0.3 * i, cfg);
    const FeatureVector a = feature_snapshot(h, cfg);
    const FeatureVector b = feature_snapshot(h, cfg);
    EXPECT_EQ(a.access_rate, b.access_rate);
    EXPECT_EQ(a.mutation_rate, b.mutation_rate);
    EXPECT_EQ(a.lifetime, b.lifetime);
}

// Recomputes smoothed rates from the whole event log: per-window counts, the
// first closed window seeds the average, every later window (empty ones as
// zero) is folded in, and the open window is folded in provisionally.
TEST(FeatureSnapshot, MatchesEventLogReplay) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        ProfileConfig cfg;
        cfg.ema = EmaConfig(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
        cfg.window_seconds = std::uniform_real_distribution<double>(0.25, 3.0)(rng);
        const double w = cfg.ema.omega();

        struct Ev {
            double t;
            int kind;
        };
        std::vector<Ev> log;
        double t = 0.0;
        const int n = 50 + static_cast<int>(rng() % 400);
        for (int i = 0; i < n; ++i) {
            // occasional long gaps produce runs of empty windows
            t += (rng() % 20 == 0) ? std::uniform_real_distribution<double>(2.0, 20.0)(rng)
                                   : std::uniform_real_distribution<double>(0.0, 0.4)(rng);
            log.push_back({t, static_cast<int>(rng() % 2)});
        }

        ObjectHeader h = fresh();
        for (const auto& e : log) record_event(h, static_cast<EventKind>(e.kind), e.t, cfg);
        const FeatureVector got = feature_snapshot(h, cfg);

        auto win = [&](double x) { return static_cast<long>(std::floor(x / cfg.window_seconds)); };
        const long last = win(log.back().t);
        std::vector<std::array<long double, 2>> counts(static_cast<std::size_t>(last + 1), {0, 0});
        for (const auto& e : log) counts[static_cast<std::size_t>(win(e.t))][e.kind] += 1;

        for (int k = 0; k < 2; ++k) {
            long double ema = 0;
            bool seeded = false;
            for (long wdx = 0; wdx < last; ++wdx) {
                const long double rate = counts[static_cast<std::size_t>(wdx)][k] / cfg.window_seconds;
                ema = seeded ? w * rate + (1 - static_cast<long double>(w)) * ema : rate;
                seeded = true;
            }
            const long double cur = counts[static_cast<std::size_t>(last)][k] / cfg.window_seconds;
            const long double want = seeded ? w * cur + (1 - static_cast<long double>(w)) * ema : cur;
            const double g = k == 0 ? got.access_rate : got.mutation_rate;
            ASSERT_NEAR(g, static_cast<double>(want), 1e-9 * std::max(1.0L, std::fabs(want))) << "trial " << trial;
        }
        EXPECT_NEAR(got.lifetime, log.back().t, 1e-12);
    }
}

TEST(Lambda, SiteRateUsedUntilAllocationEventsObserved) {
    ObjectHeader h = make_header({0, 0}, {}, 1.0, 0.0, 42.0);
    const ProfileConfig cfg;
    record_event(h, EventKind::access, 5.0, cfg);
    EXPECT_EQ(feature_snapshot(h, cfg).lambda_rate, 42.0);
    record_event(h, EventKind::allocation, 5.5, cfg);
    record_event(h, EventKind::allocation, 5.6, cfg);
    EXPECT_NE(feature_snapshot(h, cfg).lambda_rate, 42.0);
}

TEST(ComplexityTable, Defaults) {
    const ComplexityTable t;
    EXPECT_EQ(t.weight(SiteKind::loop_element), 1.0);
    EXPECT_EQ(t.weight(SiteKind::recursion_frame), 2.0);
    EXPECT_EQ(t.weight(SiteKind::matrix_row), 4.0);
}
