// Acceptance gate: one PASS/FAIL/SKIP line per criterion.
// Exit status: 0 when nothing failed, 1 on any failure, 77 when the only selected criterion was skipped.

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "vgc/vgc.hpp"

using namespace vgc;
using namespace vgc::bench;

namespace {

constexpr double kStatsTolerance = 5e-6;
constexpr double kPressureTolerance = 0.01;
constexpr int kSkipCode = 77;

enum class Status { pass, fail, skip };

struct Verdict {
    Status status = Status::pass;
    std::string detail;
};

Verdict fail(std::string why) { return {Status::fail, std::move(why)}; }

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no time limit
    std::function<Verdict()> check;
};

std::string stats_string(const PoolStats& p) {
    std::ostringstream os;
    os << "(" << p.total_requests << ", " << p.real_allocations << ", " << p.reused_objects << ", "
       << p.expired_objects << ", " << p.pool_size << ")";
    return os.str();
}

WorkloadSpec spec(WorkloadKind k, std::size_t size, std::size_t parts = 1) {
    WorkloadSpec s;
    s.kind = k;
    s.size = size;
    s.partitions = parts;
    return s;
}

Verdict expect_tables(const AllocReport& r, const std::array<PoolStats, 3>& want_rgb) {
    for (ZoneId z : kZones)
        if (!(r[z] == want_rgb[zone_index(z)]))
            return fail(std::string(zone_name(z)) + " got " + stats_string(r[z]) + " want " +
                        stats_string(want_rgb[zone_index(z)]));
    return {};
}

Verdict alloc_reuse() {
    const AllocReport r = run_alloc_experiments(spec(WorkloadKind::alloc_reuse, 1'000'000));
    const PoolStats& g = r[ZoneId::green];
    if (g.real_allocations != 1 || g.reused_objects != 999'999 || g.pool_size != 1)
        return fail("green " + stats_string(g));
    return {Status::pass, "green " + stats_string(g)};
}

Verdict zone_imbalance() {
    const AllocReport r = run_alloc_experiments(spec(WorkloadKind::zone_imbalance, 1'000'000));
    return expect_tables(r, {PoolStats{10'000, 1, 9'999, 0, 1}, PoolStats{900'000, 1, 899'999, 0, 1},
                             PoolStats{90'000, 1, 89'999, 0, 1}});
}

Verdict zone_pressure() {
    const AllocReport r = run_alloc_experiments(spec(WorkloadKind::zone_pressure, 1'000'000));
    const std::array<double, 3> want{0.1, 0.7, 0.2};
    std::ostringstream detail;
    for (ZoneId z : kZones) {
        const PoolStats& p = r[z];
        if (p.real_allocations != 1 || p.pool_size != 1)
            return fail(std::string(zone_name(z)) + " " + stats_string(p));
        const double share = static_cast<double>(p.total_requests) / 1e6;
        detail << zone_name(z) << "=" << share << " ";
        if (std::abs(share - want[zone_index(z)]) > kPressureTolerance) return fail(detail.str());
    }
    return {Status::pass, detail.str()};
}

Verdict expiration() {
    const AllocReport r = run_alloc_experiments(spec(WorkloadKind::expiration, 100'000));
    const std::array<std::uint64_t, 3> want{100'000, 1, 50'000};
    for (ZoneId z : kZones)
        if (r[z].expired_objects != want[zone_index(z)] || r[z].real_allocations != 1)
            return fail(std::string(zone_name(z)) + " " + stats_string(r[z]));
    return {};
}

Verdict checkpoint_lifecycle() {
    const AllocReport r = run_alloc_experiments(spec(WorkloadKind::checkpoint_lifecycle, 100'000));
    const std::array<std::uint64_t, 3> want{100'000, 0, 200};
    for (ZoneId z : kZones)
        if (r[z].expired_objects != want[zone_index(z)])
            return fail(std::string(zone_name(z)) + " " + stats_string(r[z]));
    return {};
}

Verdict statistics() {
    struct Table {
        const char* name;
        std::vector<double> times;
        double mean, stddev;
    };
    const Table tables[] = {
        {"loop 100k", {0.1753, 0.3648, 0.3488, 0.1867, 0.2115}, 0.25742, 0.09018},
        {"loop 200k", {0.35, 0.6174, 0.4832, 0.3678, 0.4222}, 0.44812, 0.09667},
        {"loop 400k", {0.7328, 0.9257, 0.7916, 0.9564, 0.8421}, 0.84972, 0.08695},
    };
    std::ostringstream detail;
    detail.precision(6);
    bool ok = true;
    for (const Table& t : tables) {
        std::vector<AttemptRecord> recs;
        for (std::size_t i = 0; i < t.times.size(); ++i) recs.push_back({i + 1, t.times[i], 0, 0, 0, 0});
        const BenchReport r = summarize(recs);
        const bool mean_ok = std::abs(r.mean_time_ms - t.mean) <= kStatsTolerance;
        const bool sd_ok = std::abs(r.stddev_time_ms - t.stddev) <= kStatsTolerance;
        ok = ok && mean_ok && sd_ok;
        detail << t.name << " mean " << r.mean_time_ms << (mean_ok ? "" : "!") << " sd "
               << r.stddev_time_ms << "/" << t.stddev << (sd_ok ? "" : "!") << "; ";
    }
    return {ok ? Status::pass : Status::fail, detail.str()};
}

Verdict gates_check() {
    for (unsigned m = 0; m < 8; ++m) {
        const bool s = m & 1, z = m & 2, p = m & 4;
        if (eval_liveness_gate(s, z, p) != oracle::gate(s, z, p)) return fail("scalar gate lane " + std::to_string(m));
        const auto got = zone_mask_update(s, z, p);
        const auto want = oracle::mask_update(s, z, p);
        if (got.red != want.r || got.green != want.g || got.blue != want.b)
            return fail("mask update lane " + std::to_string(m));
        BitVector bs(1), bz(1), bp(1);
        bs.set(0, s);
        bz.set(0, z);
        bp.set(0, p);
        if (sync_checkpoint(bs, bz, bp).get(0) != oracle::gate(s, z, p)) return fail("sync lane " + std::to_string(m));
    }
    std::mt19937_64 rng(7);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t width = 1 + rng() % 1024;
        BitVector s(width), z(width), p(width);
        for (std::size_t i = 0; i < width; ++i) {
            s.set(i, rng() & 1);
            z.set(i, rng() & 1);
            p.set(i, rng() & 1);
        }
        const BitVector o = eval_liveness_gate(s, z, p);
        const BitVector c = sync_checkpoint(s, z, p);
        for (std::size_t i = 0; i < width; ++i) {
            const bool want = oracle::gate(s.get(i), z.get(i), p.get(i));
            if (o.get(i) != want || c.get(i) != want) return fail("wide vector " + std::to_string(t));
        }
        const std::uint64_t r = rng(), g = rng(), b = rng();
        const auto got = zone_mask_update(r, g, b);
        for (unsigned i = 0; i < 64; ++i) {
            const auto want = oracle::mask_update((r >> i) & 1, (g >> i) & 1, (b >> i) & 1);
            if (((got.red >> i) & 1) != want.r || ((got.green >> i) & 1) != want.g || ((got.blue >> i) & 1) != want.b)
                return fail("wide mask " + std::to_string(t));
        }
    }
    return {};
}

Verdict mapping() {
    const std::uint64_t base = 0x7f0000;
    for (std::size_t i = 0; i < 4096; ++i)
        if (index_of(address_of(i, base), base, 4096) != i) return fail("index roundtrip " + std::to_string(i));
    ZoneLayout l;
    for (std::size_t r = 1; r <= 64; ++r)
        for (std::size_t g = 1; g <= 64; ++g)
            for (std::size_t b = 1; b <= 64; b += 7) {
                l.entries = {r, g, b};
                for (std::size_t i = 0; i < l.capacity(); ++i)
                    if (zone_of_index(i, l) != oracle::zone_scan(i, l)) return fail("zone scan");
            }
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        l.entries = {1 + rng() % 1365, 1 + rng() % 1365, 1 + rng() % 1365};
        for (std::size_t i = 0; i < l.capacity(); ++i)
            if (zone_of_index(i, l) != oracle::zone_scan(i, l)) return fail("zone scan wide");
    }
    for (std::size_t n = 1; n <= 64; ++n) {
        l.entries = {n, n, n};
        for (ZoneId z : kZones)
            for (std::size_t j = 0; j < n; ++j)
                if (generation_of(l.start(z) + j, l) != oracle::generation_quarter(j, n))
                    return fail("generation n=" + std::to_string(n) + " j=" + std::to_string(j));
    }
    return {};
}

FeatureVector feat(double a, double mu) {
    FeatureVector f;
    f.access_rate = a;
    f.mutation_rate = mu;
    return f;
}

Verdict classification() {
    const ThresholdSet th = ThresholdSet::simple_defaults();
    const CostParams costs;
    if (classify_simple(feat(th.a_R, 0), th, costs) == ZoneId::red) return fail("a = a_R assigned R");
    if (classify_simple(feat(0, th.mu_R), th, costs) == ZoneId::red) return fail("mu = mu_R assigned R");
    if (classify_simple(feat(th.a_G, 0), th, costs) != ZoneId::green) return fail("a = a_G not G");
    if (classify_simple(feat(0, th.mu_G), th, costs) != ZoneId::green) return fail("mu = mu_G not G");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.01, 10);
    for (int t = 0; t < 1000; ++t) {
        CostParams c;
        for (auto& w : c.weights) w = {u(rng), u(rng), u(rng)};
        FeatureVector f = feat(std::uniform_real_distribution<double>(th.a_R, th.a_G)(rng),
                               std::uniform_real_distribution<double>(th.mu_R, th.mu_G)(rng));
        f.complexity_weight = u(rng);
        f.fan_out = u(rng);
        f.size = u(rng);
        if (classify_simple(f, th, c) != oracle::argmin(f, c, {true, true, true})) return fail("middle band argmin");
    }
    const ThresholdSet pt = ThresholdSet::predicate_defaults();
    for (int t = 0; t < 10000; ++t) {
        auto pick = [&](double lo, double hi, double e0, double e1) {
            switch (rng() % 6) {
                case 0: return e0;
                case 1: return e1;
                default: return std::uniform_real_distribution<double>(lo, hi)(rng);
            }
        };
        FeatureVector f = feat(pick(0, 200, pt.a_R, pt.a_G), pick(0, 200, pt.mu_R, pt.mu_G));
        f.size = pick(0, 8192, pt.s_R, pt.s_G);
        f.lifetime = pick(0, 20, pt.tau_R, pt.tau_G);
        f.complexity_weight = pick(0, 8, 1, 2);
        f.fan_out = pick(0, 16, 0, 1);
        if (classify_predicates(f, pt, costs) != oracle::classify_predicates(f, pt, costs))
            return fail("predicate vector " + std::to_string(t));
    }
    return {};
}

double objective_ref(const std::array<double, 3>& p, const std::array<std::size_t, 3>& k,
                     const std::array<double, 3>& pi, const std::array<double, 3>& delta) {
    double v = 0;
    for (int z = 0; z < 3; ++z)
        if (p[z] > 0) v += pi[z] * p[z] + delta[z] * p[z] / static_cast<double>(k[z]);
    return v;
}

Verdict thread_allocation() {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> cost(0, 1000), eta(0.01, 0.99);
    for (int t = 0; t < 1000; ++t) {
        std::array<double, 3> c{cost(rng), cost(rng), cost(rng)};
        const std::size_t k = 3 + rng() % 62;
        const auto a = allocate_threads(c, k, {eta(rng), eta(rng), eta(rng)});
        if (a.k[0] + a.k[1] + a.k[2] != k) return fail("sum mismatch at draw " + std::to_string(t));
    }
    std::uniform_real_distribution<double> u(0.01, 100), pu(0.01, 0.99);
    for (std::size_t k = 1; k <= 12; ++k) {
        for (int t = 0; t < 200; ++t) {
            std::array<double, 3> p{u(rng), u(rng), u(rng)};
            // zero out zones until the remaining ones fit in k threads
            for (std::size_t z = k; z < 3; ++z) p[z] = 0;
            if (t % 5 == 0 && k > 1) p[rng() % 3] = 0;
            const std::array<double, 3> pi{pu(rng), pu(rng), pu(rng)}, delta{u(rng), u(rng), u(rng)};
            const auto got = best_allocation(p, k, pi, delta);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r <= k; ++r)
                for (std::size_t g = 0; r + g <= k; ++g) {
                    const std::array<std::size_t, 3> cand{r, g, k - r - g};
                    bool ok = true;
                    for (int z = 0; z < 3; ++z) ok = ok && !(p[z] > 0 && cand[z] == 0);
                    if (ok) best = std::min(best, objective_ref(p, cand, pi, delta));
                }
            const std::array<std::size_t, 3>& gk = got;
            if (gk[0] + gk[1] + gk[2] != k) return fail("best_allocation sum k=" + std::to_string(k));
            if (objective_ref(p, gk, pi, delta) != best) return fail("not minimal at k=" + std::to_string(k));
        }
    }
    return {};
}

Verdict determinism() {
    RunOptions opts;
    opts.parallel.pin = false;
    struct Case {
        WorkloadKind kind;
        std::size_t size;
    };
    const Case cases[] = {{WorkloadKind::loop, 100'000},     {WorkloadKind::loop, 200'000},
                          {WorkloadKind::loop, 400'000},     {WorkloadKind::recursion, 10'000},
                          {WorkloadKind::recursion, 20'000}, {WorkloadKind::recursion, 40'000},
                          {WorkloadKind::matrix, 64}};
    std::ostringstream detail;
    for (const Case& c : cases) {
        std::optional<std::int16_t> first;
        for (std::size_t parts : {1u, 2u, 4u}) {
            const BenchReport r = run_workload(spec(c.kind, c.size, parts), opts);
            if (r.records.size() != 5) return fail("attempt count");
            for (const AttemptRecord& a : r.records) {
                if (!first) first = a.checksum;
                if (a.checksum != *first)
                    return fail(std::string(to_string(c.kind)) + " " + std::to_string(c.size) + " partitions=" +
                                std::to_string(parts) + " attempt " + std::to_string(a.attempt));
            }
        }
        detail << to_string(c.kind) << "/" << c.size << "=" << *first << " ";
    }
    return {Status::pass, detail.str()};
}

Verdict speedup() {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw < 2) return {Status::skip, "needs at least 2 cores, found " + std::to_string(hw)};
    const BenchReport one = run_loop(spec(WorkloadKind::loop, 4'000'000, 1));
    const BenchReport two = run_loop(spec(WorkloadKind::loop, 4'000'000, 2));
    std::ostringstream detail;
    detail << "p1 " << one.mean_time_ms << " ms, p2 " << two.mean_time_ms << " ms";
    return {two.mean_time_ms <= one.mean_time_ms ? Status::pass : Status::fail, detail.str()};
}

Verdict no_migration() {
    ZoneConfig cfg;
    cfg.layout.entries = {256, 256, 256};
    ZoneManager zm(cfg);
    std::map<std::size_t, ZoneId> bound;
    std::vector<ObjectHandle> live;
    std::mt19937_64 rng(13);
    auto observe = [&](const ObjectHandle& h) {
        const ZoneId z = zm.header(h).zone;
        if (zone_of_index(h.slot_index, cfg.layout) != z) return false;
        return bound.emplace(h.slot_index, z).first->second == z;
    };
    for (int op = 0; op < 100'000; ++op) {
        const unsigned a = rng() % 8;
        try {
            if (live.empty() || a >= 5) {
                live.push_back(zm.allocate(kZones[rng() % 3], "fuzz"));
                if (!observe(live.back())) return fail("allocate op " + std::to_string(op));
            } else if (a == 4 && op % 64 == 0) {
                (void)zm.collect(static_cast<double>(op));
                std::erase_if(live, [&](const ObjectHandle& h) { return !zm.alive(h); });
            } else {
                const std::size_t pos = rng() % live.size();
                const ObjectHandle h = live[pos];
                live.erase(live.begin() + static_cast<long>(pos));
                if (a == 1 || a == 4) zm.release(h);
                else if (a == 2) zm.expire(h);
                else {
                    live.push_back(zm.expire_and_reallocate(h, kZones[rng() % 3]));
                    if (!observe(live.back())) return fail("reallocate op " + std::to_string(op));
                }
            }
        } catch (const Error& e) {
            if (e.code() != Errc::out_of_memory) return fail(std::string("op ") + std::to_string(op) + ": " + e.what());
        }
        if (op % 1000 == 0)
            for (const ObjectHandle& h : live)
                if (!observe(h)) return fail("sweep check op " + std::to_string(op));
    }
    return {Status::pass, std::to_string(bound.size()) + " indices observed"};
}

Verdict yield_neutrality() {
    ZoneConfig cfg;
    cfg.layout.entries = {64, 64, 64};
    ZoneManager zm(cfg);
    zm.release(zm.allocate(ZoneId::green, "pre"));
    (void)zm.allocate(ZoneId::blue, "pre");
    auto counters = [&] {
        std::vector<std::uint64_t> v;
        for (ZoneId z : kZones) {
            const PoolStats p = zm.pool_stats(z);
            v.insert(v.end(), {p.total_requests, p.real_allocations, p.reused_objects, p.expired_objects,
                               p.pool_size, zm.live_count(z)});
        }
        for (std::size_t w = 0; w < zm.table().word_count(); ++w) v.push_back(zm.table().word(w));
        return v;
    };
    const auto before = counters();
    YieldScope scope(zm);
    long acc = 0;
    for (int i = 0; i < 1000; ++i)
        acc += scope.yield_eval([i](YieldScope& s) {
            s.scratch<long>(i);
            return static_cast<long>(i);
        });
    if (acc != 499'500) return fail("thunk results");
    if (counters() != before) return fail("zone counters changed");
    if (scope.slots_in_use() != 0) return fail("scratch not released");
    return {};
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "allocation reuse", 5, alloc_reuse},
        {2, "zone imbalance", 10, zone_imbalance},
        {3, "zone pressure", 10, zone_pressure},
        {4, "expiration lifecycle", 5, expiration},
        {5, "checkpoint lifecycle", 5, checkpoint_lifecycle},
        {6, "statistics convention", 0, statistics},
        {7, "gate correctness", 0, gates_check},
        {8, "index/zone/generation mapping", 0, mapping},
        {9, "classification", 0, classification},
        {10, "thread allocation", 0, thread_allocation},
        {11, "determinism and partition invariance", 0, determinism},
        {12, "parallel speedup", 0, speedup},
        {13, "no migration", 0, no_migration},
        {14, "yield neutrality", 0, yield_neutrality},
    };
    return all;
}

Status run(const Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = c.check();
    } catch (const std::exception& e) {
        v = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (v.status == Status::pass && c.limit_s > 0 && secs >= c.limit_s)
        v = fail("took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_s) + " s");
    const char* tag = v.status == Status::pass ? "PASS" : v.status == Status::fail ? "FAIL" : "SKIP";
    std::cout << tag << " " << c.id << " " << c.name << " [" << secs << " s]";
    if (!v.detail.empty()) std::cout << ": " << v.detail;
    std::cout << std::endl;
    return v.status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 14));
    CLI11_PARSE(app, argc, argv);

    bool failed = false;
    std::size_t ran = 0, skipped = 0;
    for (const Criterion& c : criteria()) {
        if (only != 0 && c.id != only) continue;
        ++ran;
        const Status s = run(c);
        failed = failed || s == Status::fail;
        skipped += s == Status::skip;
    }
    if (failed) return 1;
    return ran > 0 && skipped == ran ? kSkipCode : 0;
}
