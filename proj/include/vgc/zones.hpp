#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vgc/checkpoint.hpp"
#include "vgc/error.hpp"
#include "vgc/layout.hpp"
#include "vgc/object_model.hpp"

namespace vgc {

// ---------------------------------------------------------------------------
// Thresholds and cost model
// ---------------------------------------------------------------------------

struct ThresholdSet {
    double tau_R = 0.0, tau_G = 0.0;  // seconds
    double mu_R = 0.0, mu_G = 0.0;    // writes/s
    double a_R = 0.0, a_G = 0.0;      // reads/s
    double s_R = 0.0, s_G = 0.0;      // bytes

    // Access/mutation thresholds for the simple policy (a_R < a_G, mu_R < mu_G).
    static ThresholdSet simple_defaults() {
        ThresholdSet t;
        t.a_R = 10.0;
        t.a_G = 100.0;
        t.mu_R = 10.0;
        t.mu_G = 100.0;
        t.tau_R = 0.1;
        t.tau_G = 10.0;
        t.s_R = 256.0;
        t.s_G = 4096.0;
        return t;
    }

    // Predicate policy: tau_R < tau_G, mu_R > mu_G, a_R > a_G, s_R < s_G.
    static ThresholdSet predicate_defaults() {
        ThresholdSet t;
        t.tau_R = 0.1;
        t.tau_G = 10.0;
        t.mu_R = 100.0;
        t.mu_G = 10.0;
        t.a_R = 100.0;
        t.a_G = 10.0;
        t.s_R = 256.0;
        t.s_G = 4096.0;
        return t;
    }

    void validate_simple() const {
        if (!(a_R < a_G && mu_R < mu_G))
            fail(Errc::invalid_config, "simple policy needs a_R < a_G and mu_R < mu_G");
    }

    void validate_predicates() const {
        if (!(tau_R < tau_G && mu_R > mu_G && a_R > a_G && s_R < s_G))
            fail(Errc::invalid_config,
                 "predicate policy needs tau_R < tau_G, mu_R > mu_G, a_R > a_G, s_R < s_G");
    }
};

struct ZoneWeights {
    double alpha;  // mark
    double beta;   // scan
    double gamma;  // stage
};

struct CostParams {
    std::array<ZoneWeights, 3> weights{{{1.0, 1.0, 4.0}, {1.0, 0.8, 2.0}, {0.5, 0.5, 1.0}}};
    std::array<double, 3> pi{0.5, 0.3, 0.2};  // stop-the-world fraction per zone
    double alpha_tolerance = 0.25;             // how far apart alpha_R and alpha_G may be

    const ZoneWeights& operator[](ZoneId z) const noexcept { return weights[zone_index(z)]; }
    ZoneWeights& operator[](ZoneId z) noexcept { return weights[zone_index(z)]; }
    double pi_of(ZoneId z) const noexcept { return pi[zone_index(z)]; }

    void validate() const {
        for (const auto& w : weights)
            if (w.alpha < 0 || w.beta < 0 || w.gamma < 0)
                fail(Errc::invalid_config, "cost weights must be non-negative");
        for (double p : pi)
            if (!(p > 0.0 && p < 1.0)) fail(Errc::invalid_config, "pi must lie inside (0, 1)");
        const auto& r = weights[0];
        const auto& g = weights[1];
        const auto& b = weights[2];
        if (!(r.gamma > g.gamma && g.gamma > b.gamma))
            fail(Errc::invalid_config, "cost weights need gamma_R > gamma_G > gamma_B");
        if (!(r.alpha >= g.alpha && g.alpha > b.alpha && r.alpha - g.alpha <= alpha_tolerance))
            fail(Errc::invalid_config, "cost weights need alpha_R ~ alpha_G > alpha_B");
        if (!(r.beta >= g.beta && g.beta >= b.beta))
            fail(Errc::invalid_config, "cost weights need beta_R >= beta_G >= beta_B");
    }
};

// C_z(o) = alpha_z*chi + beta_z*rho + gamma_z*s
inline double zone_cost(ZoneId z, const FeatureVector& f, const CostParams& costs) noexcept {
    const auto& w = costs[z];
    return w.alpha * f.complexity_weight + w.beta * f.fan_out + w.gamma * f.size;
}

// P_z = pi_z * sum of C_z over the zone's members
inline double pause_contribution(ZoneId z, std::span<const FeatureVector> members, const CostParams& costs) {
    double sum = 0.0;
    for (const auto& f : members) sum += zone_cost(z, f, costs);
    return sum * costs.pi_of(z);
}

inline constexpr unsigned zone_bit(ZoneId z) noexcept { return 1u << zone_index(z); }
inline constexpr unsigned kAllZones = 0b111;

/// Cheapest zone among `candidates` (bit per zone). Equal costs prefer G, then B, then R.
inline ZoneId argmin_cost(const FeatureVector& f, const CostParams& costs, unsigned candidates = kAllZones) {
    constexpr std::array<ZoneId, 3> order{ZoneId::green, ZoneId::blue, ZoneId::red};
    ZoneId best = ZoneId::green;
    double best_cost = 0.0;
    bool found = false;
    for (ZoneId z : order) {
        if ((candidates & zone_bit(z)) == 0) continue;
        const double c = zone_cost(z, f, costs);
        if (!found || c < best_cost) {
            best = z;
            best_cost = c;
            found = true;
        }
    }
    return best;
}

/// Access/mutation policy:
///   R if a < a_R and mu < mu_R; G if a >= a_G or mu >= mu_G;
///   otherwise the cheapest zone (B under the default weights).
inline ZoneId classify_simple(const FeatureVector& f, const ThresholdSet& th, const CostParams& costs) {
    const double a = f.access_rate;
    const double mu = f.mutation_rate;
    if (a < th.a_R && mu < th.mu_R) return ZoneId::red;
    if (a >= th.a_G || mu >= th.mu_G) return ZoneId::green;
    return argmin_cost(f, costs);
}

struct Eligibility {
    bool red = false;
    bool green = false;
    bool blue = false;

    unsigned mask() const noexcept {
        return (red ? zone_bit(ZoneId::red) : 0u) | (green ? zone_bit(ZoneId::green) : 0u) |
               (blue ? zone_bit(ZoneId::blue) : 0u);
    }
};

inline Eligibility eligibility(const FeatureVector& f, const ThresholdSet& th) noexcept {
    const double tau = f.lifetime, mu = f.mutation_rate, a = f.access_rate, s = f.size;
    Eligibility e;
    e.red = tau <= th.tau_R && mu >= th.mu_R && a >= th.a_R && s <= th.s_R;
    e.green = th.tau_R < tau && tau <= th.tau_G && th.mu_G <= mu && mu < th.mu_R && th.a_G <= a && a < th.a_R &&
              th.s_R < s && s <= th.s_G;
    e.blue = tau > th.tau_G || mu < th.mu_G || a < th.a_G || s > th.s_G;
    return e;
}

/// Full-feature policy: the sole eligible zone, else the cheapest eligible zone,
/// else (nothing eligible) the cheapest zone overall.
inline ZoneId classify_predicates(const FeatureVector& f, const ThresholdSet& th, const CostParams& costs) {
    const unsigned m = eligibility(f, th).mask();
    switch (m) {
    case 0b001: return ZoneId::red;
    case 0b010: return ZoneId::green;
    case 0b100: return ZoneId::blue;
    case 0: return argmin_cost(f, costs);
    default: return argmin_cost(f, costs, m);
    }
}

// ---------------------------------------------------------------------------
// Zone manager
// ---------------------------------------------------------------------------

enum class Policy : std::uint8_t { simple, predicates };
enum class PoolDiscipline : std::uint8_t { lifo, fifo };

struct PoolStats {
    std::uint64_t total_requests = 0;
    std::uint64_t real_allocations = 0;
    std::uint64_t reused_objects = 0;
    std::uint64_t expired_objects = 0;
    std::uint64_t pool_size = 0;

    friend bool operator==(const PoolStats&, const PoolStats&) = default;
};

inline constexpr std::string_view kPoolStatsCsvHeader =
    "zone,total_requests,real_allocations,reused_objects,expired_objects,pool_size";

inline std::string pool_stats_csv_row(ZoneId z, const PoolStats& s) {
    std::ostringstream os;
    os << zone_name(z) << ',' << s.total_requests << ',' << s.real_allocations << ',' << s.reused_objects << ','
       << s.expired_objects << ',' << s.pool_size;
    return os.str();
}

struct ZoneConfig {
    ZoneLayout layout;
    ThresholdSet simple = ThresholdSet::simple_defaults();
    ThresholdSet predicates = ThresholdSet::predicate_defaults();
    CostParams costs;
    Policy policy = Policy::simple;
    PoolDiscipline discipline = PoolDiscipline::lifo;
    ProfileConfig profile;
    ComplexityTable complexity;
    std::uint64_t base = 0x100000;
    // Zones whose idle live objects are marked and expired by collect().
    std::array<bool, 3> collect_idle{true, false, true};

    void validate() const {
        layout.validate();
        simple.validate_simple();
        predicates.validate_predicates();
        costs.validate();
        if (base % kObjectAlignment != 0) fail(Errc::invalid_config, "table base must be 16-byte aligned");
        if (!(profile.window_seconds > 0.0)) fail(Errc::invalid_config, "profiling window must be positive");
    }
};

struct CollectReport {
    SweepReport sweep;
    std::size_t marked = 0;
    std::vector<std::pair<ObjectHandle, ObjectHandle>> reallocated;  // (expired, replacement)
};

/// Owns the checkpoint table, per-slot headers and one reuse pool per zone.
///
/// Objects never move between zones: re-zoning expires the slot into its own
/// zone's pool and claims a slot in the target zone. Fresh slots are claimed
/// lowest index first, so an object's generation follows its index.
///
/// Not internally synchronized. Each partition of a zone is expected to be
/// driven by a single owner; only the checkpoint words are atomic.
class ZoneManager {
public:
    explicit ZoneManager(ZoneConfig cfg = {}) : cfg_(std::move(cfg)) {
        cfg_.validate();
        table_ = CheckpointTable(cfg_.layout, cfg_.base);
        headers_.resize(cfg_.layout.capacity());
        for (ZoneId z : kZones) next_fresh_[zone_index(z)] = cfg_.layout.start(z);
    }

    const ZoneConfig& config() const noexcept { return cfg_; }
    const CheckpointTable& table() const noexcept { return table_; }

    ObjectHandle allocate(ZoneId zone, std::string_view site_tag, const AllocationInfo& info = {}, double now = 0.0) {
        return allocate_at_site(zone, site_id(site_tag), info, now);
    }

    void release(ObjectHandle h) {
        const std::size_t slot = checked_live(h);
        auto& hdr = headers_[slot];
        hdr.alive = false;
        table_.set(slot, StateCode::idle);
        return_to_pool(slot);
    }

    // Marked -> expired -> reclaimed into the object's own zone pool.
    void expire(ObjectHandle h) {
        const std::size_t slot = checked_live(h);
        StateCode s = table_.get(slot);
        s = step_state(s, {.sweep_scheduled = true}).next;
        table_.set(slot, s);
        s = step_state(s, {.expired = true}).next;
        table_.set(slot, s);
        reclaim(slot);
    }

    /// Re-zoning. Same-zone requests are a no-op and return `h`.
    ObjectHandle expire_and_reallocate(ObjectHandle h, ZoneId new_zone, double now = 0.0) {
        const std::size_t slot = checked_live(h);
        const ObjectHeader& old = headers_[slot];
        if (old.zone == new_zone) return h;
        if (!has_capacity(new_zone))
            fail(Errc::out_of_memory, "zone " + std::string(zone_name(new_zone)) + " is exhausted");
        const AllocationInfo info{old.features.size, old.features.fan_out, SiteKind::generic, old.layer};
        const double chi = old.features.complexity_weight;
        const std::uint32_t site = old.site;
        expire(h);
        ObjectHandle fresh = allocate_at_site(new_zone, site, info, now);
        headers_[fresh.slot_index].features.complexity_weight = chi;
        headers_[fresh.slot_index].ema.complexity_weight = chi;
        return fresh;
    }

    void record_event(ObjectHandle h, EventKind kind, double now) {
        vgc::record_event(headers_[checked_live(h)], kind, now, cfg_.profile);
    }

    // Requests served by the slot since it was last expired (carried across reuse).
    std::uint32_t& uses(ObjectHandle h) { return headers_[checked_live(h)].uses; }

    void set_state(ObjectHandle h, StateCode s) { table_.set(checked_live(h), s); }
    StateCode state(ObjectHandle h) const { return table_.get(checked_slot(h)); }

    // Applies the signals to the object's checkpoint entry.
    Step signal(ObjectHandle h, const Signals& sig) {
        const std::size_t slot = checked_live(h);
        const Step st = step_state(table_.get(slot), sig);
        table_.set(slot, st.next);
        return st;
    }

    const ObjectHeader& header(ObjectHandle h) const { return headers_[checked_slot(h)]; }
    bool alive(ObjectHandle h) const { return headers_[checked_slot(h)].alive; }

    ZoneId classify(const FeatureVector& f) const {
        return cfg_.policy == Policy::simple ? classify_simple(f, cfg_.simple, cfg_.costs)
                                             : classify_predicates(f, cfg_.predicates, cfg_.costs);
    }
    FeatureVector snapshot(ObjectHandle h) const { return feature_snapshot(header(h), cfg_.profile); }

    bool has_capacity(ZoneId z) const noexcept {
        return !pools_[zone_index(z)].empty() || next_fresh_[zone_index(z)] < cfg_.layout.end(z);
    }

    PoolStats pool_stats(ZoneId z) const noexcept { return stats_[zone_index(z)]; }
    std::size_t live_count(ZoneId z) const noexcept { return live_[zone_index(z)]; }

    std::vector<FeatureVector> members(ZoneId z) const {
        std::vector<FeatureVector> out;
        for (std::size_t i = cfg_.layout.start(z); i < next_fresh_[zone_index(z)]; ++i)
            if (headers_[i].alive) out.push_back(feature_snapshot(headers_[i], cfg_.profile));
        return out;
    }
    double pause_contribution(ZoneId z) const { return vgc::pause_contribution(z, members(z), cfg_.costs); }

    /// One collection epoch:
    ///  1. idle live objects in collect_idle zones are marked (110) then expired (111);
    ///  2. the liveness gate sweeps the whole table, Z = zone has live objects;
    ///  3. dead 111 entries are reclaimed into their zone pools;
    ///  4. promotion/demotion candidates are re-classified; a new zone means
    ///     expire-and-reallocate, the same zone returns them to Active.
    CollectReport collect(double now = 0.0) {
        CollectReport rep;
        for (ZoneId z : kZones) {
            if (!cfg_.collect_idle[zone_index(z)]) continue;
            for (std::size_t i = cfg_.layout.start(z); i < next_fresh_[zone_index(z)]; ++i) {
                if (!headers_[i].alive || table_.get(i) != StateCode::idle) continue;
                StateCode s = step_state(StateCode::idle, {.sweep_scheduled = true}).next;
                s = step_state(s, {.expired = true}).next;
                table_.set(i, s);
                ++rep.marked;
            }
        }

        SweepMasks masks;
        for (ZoneId z : kZones) masks.zone_active[zone_index(z)] = live_[zone_index(z)] > 0;
        rep.sweep = table_.epoch_sweep(masks);
        for (std::size_t idx : rep.sweep.reclaimed) {
            if (headers_[idx].alive) reclaim(idx);
            else table_.set(idx, StateCode::idle);
        }

        for (ZoneId z : kZones) {
            const std::size_t end = next_fresh_[zone_index(z)];
            for (std::size_t i = cfg_.layout.start(z); i < end; ++i) {
                if (!headers_[i].alive) continue;
                const StateCode s = table_.get(i);
                if (s != StateCode::promote_candidate && s != StateCode::demote_candidate) continue;
                const ObjectHandle h = headers_[i].handle;
                const ZoneId target = classify(feature_snapshot(headers_[i], cfg_.profile));
                if (target == z || !has_capacity(target)) {
                    table_.set(i, StateCode::active);
                } else {
                    rep.reallocated.emplace_back(h, expire_and_reallocate(h, target, now));
                }
            }
        }
        return rep;
    }

    // Debug snapshot of live entries: `index state zone generation`.
    void dump_snapshot(std::ostream& os) const {
        table_.dump(os, [this](std::size_t i) { return headers_[i].alive; });
    }

    std::string stats_csv() const {
        std::string out(kPoolStatsCsvHeader);
        out += '\n';
        for (ZoneId z : {ZoneId::green, ZoneId::blue, ZoneId::red}) out += pool_stats_csv_row(z, stats_[zone_index(z)]) + '\n';
        return out;
    }

private:
    struct Site {
        std::string tag;
        RateTracker<1> rate;
    };

    std::uint32_t site_id(std::string_view tag) {
        auto it = site_ids_.find(std::string(tag));
        if (it != site_ids_.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(sites_.size());
        sites_.push_back({std::string(tag), RateTracker<1>(0.0)});
        site_ids_.emplace(std::string(tag), id);
        return id;
    }

    ObjectHandle allocate_at_site(ZoneId zone, std::uint32_t site, const AllocationInfo& info, double now) {
        const std::size_t zi = zone_index(zone);
        auto& pool = pools_[zi];
        auto& st = stats_[zi];
        std::size_t slot = 0;
        if (!pool.empty()) {
            if (cfg_.discipline == PoolDiscipline::lifo) {
                slot = pool.back();
                pool.pop_back();
            } else {
                slot = pool.front();
                pool.pop_front();
            }
            ++st.reused_objects;
        } else if (next_fresh_[zi] < cfg_.layout.end(zone)) {
            slot = next_fresh_[zi]++;
            ++st.real_allocations;
        } else {
            fail(Errc::out_of_memory, "zone " + std::string(zone_name(zone)) + " is exhausted");
        }
        ++st.total_requests;
        st.pool_size = pool.size();

        auto& s = sites_[site];
        s.rate.record(0, now, cfg_.profile);
        const double lambda = s.rate.snapshot(0, cfg_.profile);

        const std::uint32_t uses = headers_[slot].uses;
        ObjectHeader& h = headers_[slot];
        h = make_header({slot, address_of(slot, cfg_.base)}, info, cfg_.complexity.weight(info.kind), now, lambda);
        h.zone = zone;
        h.generation = generation_of(slot, zone, cfg_.layout);
        h.site = site;
        h.uses = uses;
        table_.set(slot, StateCode::active);
        ++live_[zi];
        return h.handle;
    }

    void reclaim(std::size_t slot) {
        auto& h = headers_[slot];
        h.alive = false;
        h.uses = 0;
        ++stats_[zone_index(h.zone)].expired_objects;
        table_.set(slot, StateCode::idle);
        return_to_pool(slot);
    }

    void return_to_pool(std::size_t slot) {
        const std::size_t zi = zone_index(headers_[slot].zone);
        pools_[zi].push_back(slot);
        stats_[zi].pool_size = pools_[zi].size();
        --live_[zi];
    }

    std::size_t checked_slot(ObjectHandle h) const {
        const std::size_t slot = index_of(h.address, cfg_.base, table_.size());
        if (slot != h.slot_index) fail(Errc::invalid_input, "handle address does not match its slot");
        return slot;
    }

    std::size_t checked_live(ObjectHandle h) const {
        const std::size_t slot = checked_slot(h);
        if (!headers_[slot].alive) fail(Errc::lifecycle_violation, "object is not alive");
        return slot;
    }

    ZoneConfig cfg_;
    CheckpointTable table_;
    std::vector<ObjectHeader> headers_;
    std::array<std::deque<std::size_t>, 3> pools_;
    std::array<std::size_t, 3> next_fresh_{};
    std::array<PoolStats, 3> stats_{};
    std::array<std::size_t, 3> live_{};
    std::vector<Site> sites_;
    std::unordered_map<std::string, std::uint32_t> site_ids_;
};

} // namespace vgc
