#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

#include "vgc/checkpoint.hpp"
#include "vgc/error.hpp"
#include "vgc/layout.hpp"

namespace vgc {

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    // More threads than cores: threads are clustered onto shared cores.
    bool clustered() const noexcept { return num > den; }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

// P = T / C, reduced.
inline Ratio partition_ratio(std::uint64_t threads, std::uint64_t cores) {
    if (cores == 0) fail(Errc::invalid_topology, "core count must be at least 1");
    const std::uint64_t g = std::gcd(threads, cores);
    return g == 0 ? Ratio{0, 1} : Ratio{threads / g, cores / g};
}

// Thread i -> core. One-to-one when threads <= cores, round-robin otherwise.
inline std::vector<std::size_t> map_threads_to_cores(std::size_t threads, std::size_t cores) {
    if (cores == 0) fail(Errc::invalid_topology, "core count must be at least 1");
    std::vector<std::size_t> out(threads);
    for (std::size_t i = 0; i < threads; ++i) out[i] = i % cores;
    return out;
}

inline std::size_t detected_cores() noexcept {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// ---------------------------------------------------------------------------
// Partition plans
// ---------------------------------------------------------------------------

struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    friend bool operator==(const Range&, const Range&) = default;
};

struct PartitionPlan {
    std::size_t total_work = 0;
    std::vector<Range> ranges;
    std::size_t workers = 0;
    std::vector<std::size_t> affinity;  // core per worker; empty = unpinned
};

// Range p = [floor(p*N/P), floor((p+1)*N/P)).
inline PartitionPlan make_partitions(std::size_t n, std::size_t parts) {
    if (parts == 0) fail(Errc::invalid_plan, "partition count must be at least 1");
    PartitionPlan plan;
    plan.total_work = n;
    plan.workers = parts;
    plan.ranges.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) plan.ranges.push_back({split_point(n, parts, p), split_point(n, parts, p + 1)});
    return plan;
}

// ---------------------------------------------------------------------------
// Checkpoint synchronization
// ---------------------------------------------------------------------------

// C_T = (S_T and Z_T) or (not S_T and P_T), lanewise.
inline BitVector sync_checkpoint(const BitVector& s, const BitVector& z, const BitVector& p) {
    return eval_liveness_gate(s, z, p);
}

// Merges per-worker results in worker order into one snapshot.
inline BitVector aggregate(std::span<const BitVector> parts) {
    std::size_t width = 0;
    for (const auto& p : parts) width += p.width();
    BitVector out(width);
    std::size_t at = 0;
    for (const auto& p : parts)
        for (std::size_t i = 0; i < p.width(); ++i) out.set(at++, p.get(i));
    return out;
}

// ---------------------------------------------------------------------------
// Zone thread allocation
// ---------------------------------------------------------------------------

struct ThreadAllocation {
    std::array<std::size_t, 3> k{};  // R, G, B
    std::size_t total = 0;
    std::array<double, 3> eta{};
    std::array<double, 3> delta{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> lower_bound{};  // ceil(eta_z * share_z * k)

    std::size_t operator[](ZoneId z) const noexcept { return k[zone_index(z)]; }
};

/// k_z = ceil(eta_z * (C_z / C_total) * k), then reconciled to sum to k.
///
/// Overshoot is removed one thread at a time from the zone whose ceiling
/// overshot its exact share the most (larger k_z first on ties); a shortfall
/// goes to the zone with the largest cost share. All-zero costs fall back to
/// floor(k/3) each with the remainder on Green.
inline ThreadAllocation allocate_threads(std::array<double, 3> zone_costs, std::size_t k, std::array<double, 3> eta,
                                         bool allow_empty_zones = false) {
    if (k < 3 && !allow_empty_zones)
        fail(Errc::invalid_input, "thread allocation needs k >= 3 unless zones may go without threads");
    for (double e : eta)
        if (!(e > 0.0 && e < 1.0)) fail(Errc::invalid_input, "eta multipliers must lie inside (0, 1)");
    for (double c : zone_costs)
        if (!(c >= 0.0)) fail(Errc::invalid_input, "zone costs must be non-negative");

    ThreadAllocation a;
    a.total = k;
    a.eta = eta;
    const double total = zone_costs[0] + zone_costs[1] + zone_costs[2];
    if (total == 0.0) {
        a.k = {k / 3, k / 3 + k % 3, k / 3};
        return a;
    }

    std::array<double, 3> exact{};
    for (std::size_t z = 0; z < 3; ++z) {
        exact[z] = eta[z] * (zone_costs[z] / total) * static_cast<double>(k);
        a.lower_bound[z] = static_cast<std::size_t>(std::ceil(exact[z]));
        a.k[z] = a.lower_bound[z];
    }

    auto sum = [&] { return a.k[0] + a.k[1] + a.k[2]; };
    while (sum() > k) {
        std::size_t pick = 3;
        for (std::size_t z = 0; z < 3; ++z) {
            if (a.k[z] == 0) continue;
            if (pick == 3) {
                pick = z;
                continue;
            }
            const double over_z = static_cast<double>(a.k[z]) - exact[z];
            const double over_p = static_cast<double>(a.k[pick]) - exact[pick];
            if (over_z > over_p || (over_z == over_p && a.k[z] > a.k[pick])) pick = z;
        }
        --a.k[pick];
    }
    if (sum() < k) {
        const auto largest = static_cast<std::size_t>(
            std::max_element(zone_costs.begin(), zone_costs.end()) - zone_costs.begin());
        a.k[largest] += k - sum();
    }
    return a;
}

// sum_z [pi_z * P_z + delta_z * P_z / k_z]
inline double scheduler_objective(std::array<double, 3> pause, std::array<std::size_t, 3> k,
                                  std::array<double, 3> pi, std::array<double, 3> delta) {
    double total = 0.0;
    for (std::size_t z = 0; z < 3; ++z) {
        if (pause[z] == 0.0) continue;
        if (k[z] == 0) fail(Errc::undefined_objective, "zone with pause work has no threads");
        total += pi[z] * pause[z] + delta[z] * (pause[z] / static_cast<double>(k[z]));
    }
    return total;
}

// Exhaustive search over (k_R, k_G, k_B) with sum k. Ties keep the first triple in
// lexicographic order.
inline std::array<std::size_t, 3> best_allocation(std::array<double, 3> pause, std::size_t k,
                                                  std::array<double, 3> pi, std::array<double, 3> delta) {
    std::optional<std::array<std::size_t, 3>> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r <= k; ++r) {
        for (std::size_t g = 0; g + r <= k; ++g) {
            const std::array<std::size_t, 3> cand{r, g, k - r - g};
            bool feasible = true;
            for (std::size_t z = 0; z < 3; ++z) feasible = feasible && !(pause[z] > 0.0 && cand[z] == 0);
            if (!feasible) continue;
            const double v = scheduler_objective(pause, cand, pi, delta);
            if (!best || v < best_value) {
                best = cand;
                best_value = v;
            }
        }
    }
    if (!best) fail(Errc::undefined_objective, "not enough threads to cover every zone with pause work");
    return *best;
}

// ---------------------------------------------------------------------------
// Rebalancing
// ---------------------------------------------------------------------------

struct RebalanceSample {
    double thread_time = 0.0;  // seconds
    double mem_usage = 0.0;    // KB
    std::size_t partitions_active = 1;
};

enum class RebalanceMode : std::uint8_t {
    normalized,  // time and memory each divided by their sample mean before summing
    raw,         // seconds + KB, literally
};

struct RebalanceResult {
    double target = 0.0;               // L_new
    std::vector<double> loads;         // per sample
    std::vector<std::size_t> flagged;  // samples whose load exceeds factor * target
};

/// L_new = sum_i (T_i + M_i) / n, with n the active partition count carried by
/// the samples. Samples loaded beyond `factor` * L_new are flagged for split
/// or migration.
inline RebalanceResult rebalance_target(std::span<const RebalanceSample> samples,
                                        RebalanceMode mode = RebalanceMode::normalized, double factor = 1.5) {
    if (samples.empty()) fail(Errc::invalid_sample, "no rebalance samples");
    const std::size_t n = samples.front().partitions_active;
    for (const auto& s : samples) {
        if (s.partitions_active == 0) fail(Errc::invalid_sample, "active partition count must be at least 1");
        if (s.partitions_active != n) fail(Errc::invalid_sample, "samples disagree on the active partition count");
    }

    double t_scale = 1.0;
    double m_scale = 1.0;
    if (mode == RebalanceMode::normalized) {
        double t_mean = 0.0, m_mean = 0.0;
        for (const auto& s : samples) {
            t_mean += s.thread_time;
            m_mean += s.mem_usage;
        }
        t_mean /= static_cast<double>(samples.size());
        m_mean /= static_cast<double>(samples.size());
        t_scale = t_mean > 0.0 ? 1.0 / t_mean : 0.0;
        m_scale = m_mean > 0.0 ? 1.0 / m_mean : 0.0;
    }

    RebalanceResult r;
    double sum = 0.0;
    for (const auto& s : samples) {
        r.loads.push_back(s.thread_time * t_scale + s.mem_usage * m_scale);
        sum += r.loads.back();
    }
    r.target = sum / static_cast<double>(n);
    for (std::size_t i = 0; i < r.loads.size(); ++i)
        if (r.loads[i] > factor * r.target) r.flagged.push_back(i);
    return r;
}

// ---------------------------------------------------------------------------
// Parallel execution
// ---------------------------------------------------------------------------

struct PartitionFault {
    std::size_t partition = 0;
    Range range;
    std::string message;
};

template <class T>
struct ParallelOutcome {
    std::vector<std::optional<T>> partials;  // one per range, empty where the range faulted
    std::vector<PartitionFault> faults;
    bool pinned = false;                     // affinity applied to every worker
};

template <class T>
class PartitionFaultError : public Error {
public:
    explicit PartitionFaultError(ParallelOutcome<T> outcome)
        : Error(Errc::partition_fault, describe(outcome.faults)), outcome_(std::move(outcome)) {}
    const ParallelOutcome<T>& outcome() const noexcept { return outcome_; }

private:
    static std::string describe(const std::vector<PartitionFault>& faults) {
        std::string s;
        for (const auto& f : faults) {
            if (!s.empty()) s += "; ";
            s += "partition " + std::to_string(f.partition) + " [" + std::to_string(f.range.begin) + ", " +
                 std::to_string(f.range.end) + "): " + f.message;
        }
        return s;
    }
    ParallelOutcome<T> outcome_;
};

struct ParallelOptions {
    bool pin = true;        // best-effort core affinity
    std::size_t cores = 0;  // 0 = detect
};

namespace detail {
inline bool pin_current_thread(std::size_t core) noexcept {
#if defined(__linux__)
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(static_cast<int>(core), &set);
    return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
    (void)core;
    return false;
#endif
}
} // namespace detail

/// Runs `kernel(range)` for every range of `plan`, one worker per range
/// (a single range runs on the caller). A throwing kernel faults only its range.
template <class T, class Kernel>
ParallelOutcome<T> try_run_parallel(const PartitionPlan& plan, Kernel&& kernel, const ParallelOptions& opts = {}) {
    const std::size_t n = plan.ranges.size();
    ParallelOutcome<T> out;
    out.partials.resize(n);
    std::vector<std::optional<std::string>> errors(n);
    std::vector<char> pinned(n, 0);

    const std::size_t cores = opts.cores == 0 ? detected_cores() : opts.cores;
    const auto mapping = plan.affinity.empty() ? map_threads_to_cores(n, cores) : plan.affinity;

    auto work = [&](std::size_t i) {
        if (opts.pin && n > 1) pinned[i] = detail::pin_current_thread(mapping[i % mapping.size()]) ? 1 : 0;
        try {
            out.partials[i].emplace(kernel(plan.ranges[i]));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        } catch (...) {
            errors[i] = "unknown failure";
        }
    };

    if (n == 1) {
        work(0);
    } else {
        std::vector<std::jthread> workers;
        workers.reserve(n);
        for (std::size_t i = 0; i < n; ++i) workers.emplace_back(work, i);
    }

    out.pinned = n > 1 && std::all_of(pinned.begin(), pinned.end(), [](char c) { return c != 0; });
    for (std::size_t i = 0; i < n; ++i)
        if (errors[i]) out.faults.push_back({i, plan.ranges[i], *errors[i]});
    return out;
}

/// Partial results are folded from `identity` in range order, so the result
/// does not depend on worker interleaving. Any faulted range raises
/// PartitionFaultError carrying every partial that did complete.
template <class T, class Kernel, class Combine>
T run_parallel(const PartitionPlan& plan, Kernel&& kernel, Combine&& combine, T identity,
               const ParallelOptions& opts = {}) {
    auto outcome = try_run_parallel<T>(plan, std::forward<Kernel>(kernel), opts);
    if (!outcome.faults.empty()) throw PartitionFaultError<T>(std::move(outcome));
    T acc = std::move(identity);
    for (auto& p : outcome.partials) acc = combine(std::move(acc), std::move(*p));
    return acc;
}

} // namespace vgc
