#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "vgc/error.hpp"
#include "vgc/layout.hpp"

namespace vgc {

// Heap objects sit on 16-byte boundaries, so slot i lives at base + 16*i.
inline constexpr std::uint64_t kObjectAlignment = 16;

constexpr std::uint64_t address_of(std::size_t slot_index, std::uint64_t base) noexcept {
    return base + kObjectAlignment * static_cast<std::uint64_t>(slot_index);
}

struct ObjectHandle {
    std::size_t slot_index = 0;
    std::uint64_t address = 0;

    friend bool operator==(const ObjectHandle&, const ObjectHandle&) = default;
};

// f(o) = (lambda, tau, mu, a, s, rho, chi). Rates are per second of logical time.
struct FeatureVector {
    double lambda_rate = 0.0;        // allocations/s at the object's allocation site
    double lifetime = 0.0;           // seconds since allocation
    double mutation_rate = 0.0;      // writes/s
    double access_rate = 0.0;        // reads/s
    double size = 0.0;               // bytes
    double fan_out = 0.0;            // inbound references
    double complexity_weight = 0.0;  // dimensionless

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

class EmaConfig {
public:
    explicit EmaConfig(double omega = 0.25) : omega_(omega) {
        if (!(omega > 0.0 && omega < 1.0))
            fail(Errc::invalid_config, "EMA weight must lie strictly inside (0, 1)");
    }
    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

// EMA_{t+1} = w*x_t + (1-w)*EMA_t
inline double ema_update(double prev, double sample, const EmaConfig& cfg) noexcept {
    return cfg.omega() * sample + (1.0 - cfg.omega()) * prev;
}

struct ProfileConfig {
    EmaConfig ema{0.25};
    double window_seconds = 1.0;
};

// Deterministic clock for profiling: each operation advances time by a fixed step.
class LogicalClock {
public:
    explicit LogicalClock(double seconds_per_op = 1e-6) : step_(seconds_per_op) {}
    void tick(std::uint64_t ops = 1) noexcept { ops_ += ops; }
    std::uint64_t ops() const noexcept { return ops_; }
    double now() const noexcept { return static_cast<double>(ops_) * step_; }

private:
    std::uint64_t ops_ = 0;
    double step_;
};

enum class SiteKind : std::uint8_t { generic, loop_element, recursion_frame, matrix_row };

// chi is looked up per workload site kind at allocation.
struct ComplexityTable {
    double generic = 1.0;
    double loop_element = 1.0;
    double recursion_frame = 2.0;
    double matrix_row = 4.0;

    double weight(SiteKind k) const noexcept {
        switch (k) {
        case SiteKind::loop_element: return loop_element;
        case SiteKind::recursion_frame: return recursion_frame;
        case SiteKind::matrix_row: return matrix_row;
        case SiteKind::generic: break;
        }
        return generic;
    }
};

/// Event counts over fixed logical windows, smoothed with an EMA as each window closes.
///
/// Windows are anchored at `origin`: window k covers [origin + kW, origin + (k+1)W).
/// Windows skipped without events close as zero-rate samples. The first closed
/// window seeds the average directly.
template <std::size_t Channels>
class RateTracker {
public:
    RateTracker() = default;
    explicit RateTracker(double origin) : origin_(origin) {}

    void record(std::size_t channel, double now, const ProfileConfig& cfg) {
        advance(now, cfg);
        ++counts_[channel];
    }

    void advance(double now, const ProfileConfig& cfg) {
        const auto k = window_of(now, cfg);
        if (k <= window_) return;
        close_window(cfg);
        // Each empty window scales the average by (1 - w).
        if (const auto empty = k - window_ - 1; empty > 0) {
            const double decay = std::pow(1.0 - cfg.ema.omega(), static_cast<double>(empty));
            for (auto& e : ema_) e *= decay;
        }
        window_ = k;
    }

    std::uint64_t count(std::size_t channel) const noexcept { return counts_[channel]; }
    double current_rate(std::size_t channel, const ProfileConfig& cfg) const noexcept {
        return static_cast<double>(counts_[channel]) / cfg.window_seconds;
    }
    bool seeded() const noexcept { return seeded_; }
    double smoothed(std::size_t channel) const noexcept { return ema_[channel]; }

    // Smoothed view with the open window folded in as a provisional sample.
    double snapshot(std::size_t channel, const ProfileConfig& cfg) const noexcept {
        const double cur = current_rate(channel, cfg);
        return seeded_ ? ema_update(ema_[channel], cur, cfg.ema) : cur;
    }

private:
    std::uint64_t window_of(double now, const ProfileConfig& cfg) const noexcept {
        const double elapsed = now - origin_;
        return elapsed <= 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(elapsed / cfg.window_seconds));
    }

    void close_window(const ProfileConfig& cfg) {
        for (std::size_t c = 0; c < Channels; ++c) {
            const double sample = current_rate(c, cfg);
            ema_[c] = seeded_ ? ema_update(ema_[c], sample, cfg.ema) : sample;
            counts_[c] = 0;
        }
        seeded_ = true;
    }

    double origin_ = 0.0;
    std::uint64_t window_ = 0;
    std::array<std::uint64_t, Channels> counts_{};
    std::array<double, Channels> ema_{};
    bool seeded_ = false;
};

enum class EventKind : std::uint8_t { access = 0, mutation = 1, allocation = 2 };

enum class Layer : std::uint8_t { active, passive };

struct AllocationInfo {
    double size = 16.0;
    double fan_out = 0.0;
    SiteKind kind = SiteKind::generic;
    Layer layer = Layer::active;
};

struct ObjectHeader {
    ObjectHandle handle;
    ZoneId zone = ZoneId::green;
    Generation generation = Generation::gen0;
    std::size_t checkpoint_index = 0;
    FeatureVector features;  // raw: current-window rates, lifetime, static attributes
    FeatureVector ema;       // rates smoothed over closed windows
    Layer layer = Layer::active;
    bool alive = false;

    double allocated_at = 0.0;
    double last_event_at = 0.0;
    std::uint32_t site = 0;
    std::uint32_t uses = 0;  // requests served by this slot since its last expiry
    bool lambda_observed = false;  // allocation events seen; otherwise lambda is the site rate
    RateTracker<3> rates;

    std::uint64_t window_count(EventKind kind) const noexcept {
        return rates.count(static_cast<std::size_t>(kind));
    }
};

// Fresh header for a slot claimed at `now`. Placement fields are filled by the zone manager.
inline ObjectHeader make_header(ObjectHandle handle, const AllocationInfo& info, double chi, double now,
                                double site_lambda) {
    ObjectHeader h;
    h.handle = handle;
    h.checkpoint_index = handle.slot_index;
    h.layer = info.layer;
    h.alive = true;
    h.allocated_at = now;
    h.last_event_at = now;
    h.rates = RateTracker<3>(now);
    h.features.size = h.ema.size = info.size;
    h.features.fan_out = h.ema.fan_out = info.fan_out;
    h.features.complexity_weight = h.ema.complexity_weight = chi;
    h.features.lambda_rate = h.ema.lambda_rate = site_lambda;
    return h;
}

/// Profiles one event on a live header. Placement (zone, generation, checkpoint
/// index) is never touched.
inline void record_event(ObjectHeader& h, EventKind kind, double now, const ProfileConfig& cfg) {
    if (!h.alive) fail(Errc::lifecycle_violation, "event recorded on a dead object header");
    if (now < h.last_event_at) fail(Errc::invalid_input, "event time precedes the previous event");

    h.rates.record(static_cast<std::size_t>(kind), now, cfg);
    h.last_event_at = now;
    h.features.lifetime = h.ema.lifetime = now - h.allocated_at;

    h.features.access_rate = h.rates.current_rate(0, cfg);
    h.features.mutation_rate = h.rates.current_rate(1, cfg);
    if (h.rates.seeded()) {
        h.ema.access_rate = h.rates.smoothed(0);
        h.ema.mutation_rate = h.rates.smoothed(1);
    }
    if (kind == EventKind::allocation) h.lambda_observed = true;
    if (h.lambda_observed) {
        h.features.lambda_rate = h.rates.current_rate(2, cfg);
        if (h.rates.seeded()) h.ema.lambda_rate = h.rates.smoothed(2);
    }
}

// Smoothed feature view used by classification. Pure read.
inline FeatureVector feature_snapshot(const ObjectHeader& h, const ProfileConfig& cfg) {
    FeatureVector f = h.ema;
    f.access_rate = h.rates.snapshot(0, cfg);
    f.mutation_rate = h.rates.snapshot(1, cfg);
    if (h.lambda_observed) f.lambda_rate = h.rates.snapshot(2, cfg);
    return f;
}

} // namespace vgc
