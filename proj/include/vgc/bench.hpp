#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vgc/error.hpp"
#include "vgc/ppe.hpp"
#include "vgc/zones.hpp"

namespace vgc::bench {

enum class WorkloadKind : std::uint8_t {
    loop,
    recursion,
    deep_recursion,
    matrix,
    alloc_reuse,
    zone_pressure,
    zone_imbalance,
    expiration,
    checkpoint_lifecycle,
};

inline constexpr std::array<std::string_view, 9> kKindNames{
    "loop",           "recursion",     "deep_recursion", "matrix",
    "alloc_reuse",    "zone_pressure", "zone_imbalance", "expiration",
    "checkpoint_lifecycle"};

constexpr std::string_view to_string(WorkloadKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

inline WorkloadKind parse_kind(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == s) return static_cast<WorkloadKind>(i);
    fail(Errc::invalid_input, "unknown workload kind '" + std::string(s) + "'");
}

constexpr bool is_alloc_kind(WorkloadKind k) noexcept { return k >= WorkloadKind::alloc_reuse; }

// Deepest chain run_recursion will attempt per kind.
inline constexpr std::size_t kRecursionSafeDepth = 10'000;
inline constexpr std::size_t kDeepRecursionSafeDepth = 50'000;

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::loop;
    std::size_t size = 0;
    std::size_t chunk = 0;  // 0 = kind default
    std::size_t partitions = 1;
    std::size_t attempts = 5;
    std::uint64_t seed = 0;
};

inline std::size_t safe_depth(WorkloadKind k) noexcept {
    return k == WorkloadKind::deep_recursion ? kDeepRecursionSafeDepth : kRecursionSafeDepth;
}

// Chain depth for recursion kinds: --chunk if given, else 1000 (recursion) or
// size/10 (deep_recursion) when that divides size, else the whole size.
inline std::size_t effective_chunk(const WorkloadSpec& s) noexcept {
    if (s.chunk != 0) return s.chunk;
    if (s.size == 0) return 1;
    const std::size_t pref = s.kind == WorkloadKind::deep_recursion ? std::max<std::size_t>(1, s.size / 10) : 1000;
    return s.size % pref == 0 ? pref : s.size;
}

inline void validate(const WorkloadSpec& s) {
    if (s.attempts < 1) fail(Errc::invalid_input, "attempts must be at least 1");
    if (s.partitions < 1) fail(Errc::invalid_plan, "partitions must be at least 1");
    if (s.kind == WorkloadKind::recursion || s.kind == WorkloadKind::deep_recursion) {
        const std::size_t chunk = effective_chunk(s);
        if (s.size % chunk != 0) fail(Errc::invalid_input, "chunk must divide size");
        if (chunk > safe_depth(s.kind))
            fail(Errc::depth_limit, "chunk depth " + std::to_string(chunk) + " exceeds the safe limit of " +
                                        std::to_string(safe_depth(s.kind)));
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

// Checksums are the kernel accumulator wrapped to 16-bit two's complement.
constexpr std::int16_t wrap16(std::uint64_t acc) noexcept {
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(acc & 0xFFFFu));
}

namespace detail {
// Keeps the compiler from folding a loop into a closed form.
inline void opaque(std::uint64_t& v) noexcept {
#if defined(__GNUC__)
    asm volatile("" : "+r"(v));
#else
    (void)v;
#endif
}
} // namespace detail

// sum of (i*31 + 7) over the range, modulo 2^64
inline std::uint64_t loop_partial(Range r) noexcept {
    std::uint64_t acc = 0;
    for (std::size_t i = r.begin; i < r.end; ++i) {
        acc += static_cast<std::uint64_t>(i) * 31u + 7u;
        detail::opaque(acc);
    }
    return acc;
}

// One recursive chain: frame d (1-based) contributes d*13 - 5.
[[gnu::noinline]] inline std::uint64_t descend(std::uint64_t depth, std::uint64_t max_depth) noexcept {
    volatile std::uint64_t frame = depth * 13u - 5u;
    const std::uint64_t below = depth < max_depth ? descend(depth + 1, max_depth) : 0;
    return below + frame;
}

inline std::uint64_t recursion_partial(Range chains, std::size_t chunk) noexcept {
    std::uint64_t acc = 0;
    for (std::size_t c = chains.begin; c < chains.end; ++c) acc += chunk == 0 ? 0 : descend(1, chunk);
    return acc;
}

struct IntMatrix {
    std::size_t n = 0;
    std::vector<std::int32_t> data;  // row-major

    std::int32_t at(std::size_t r, std::size_t c) const noexcept { return data[r * n + c]; }
};

// Entries ((r*n + c + seed) mod 17) - 8.
inline IntMatrix seeded_matrix(std::size_t n, std::uint64_t seed) {
    IntMatrix m{n, std::vector<std::int32_t>(n * n)};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            m.data[r * n + c] = static_cast<std::int32_t>((r * n + c + seed) % 17) - 8;
    return m;
}

// Writes rows [rows.begin, rows.end) of A*B into `out` and returns the sum of those entries.
inline std::uint64_t matrix_rows(const IntMatrix& a, const IntMatrix& b, Range rows, std::vector<std::int64_t>& out) {
    const std::size_t n = a.n;
    std::uint64_t acc = 0;
    for (std::size_t r = rows.begin; r < rows.end; ++r) {
        std::int64_t* row = out.data() + r * n;
        std::fill(row, row + n, std::int64_t{0});
        for (std::size_t k = 0; k < n; ++k) {
            const std::int64_t aik = a.at(r, k);
            const std::int32_t* brow = b.data.data() + k * n;
            for (std::size_t c = 0; c < n; ++c) row[c] += aik * brow[c];
        }
        for (std::size_t c = 0; c < n; ++c) acc += static_cast<std::uint64_t>(row[c]);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

inline constexpr std::int64_t kMemUnavailable = -1;

// Resident set size in KB, or kMemUnavailable where the probe is unsupported.
inline std::int64_t measure_memory() noexcept {
#if defined(__linux__)
    std::FILE* f = std::fopen("/proc/self/status", "r");
    if (f == nullptr) return kMemUnavailable;
    char line[256];
    std::int64_t kb = kMemUnavailable;
    while (std::fgets(line, sizeof line, f) != nullptr) {
        long long v = 0;
        if (std::sscanf(line, "VmRSS: %lld kB", &v) == 1) {
            kb = v;
            break;
        }
    }
    std::fclose(f);
    return kb;
#else
    return kMemUnavailable;
#endif
}

struct AttemptRecord {
    std::size_t attempt = 0;
    double time_ms = 0.0;
    std::int16_t checksum = 0;
    std::int64_t mem_before_kb = kMemUnavailable;
    std::int64_t mem_after_kb = kMemUnavailable;
    std::int64_t delta_kb = kMemUnavailable;

    bool mem_available() const noexcept { return mem_before_kb != kMemUnavailable && mem_after_kb != kMemUnavailable; }
    friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

struct BenchReport {
    WorkloadSpec spec;
    std::vector<AttemptRecord> records;
    double mean_time_ms = 0.0;
    double stddev_time_ms = 0.0;  // sample (n-1) standard deviation
    bool stddev_defined = false;  // false with a single attempt; stddev is then 0
    double mean_delta_kb = 0.0;
    bool mem_available = false;
    bool pinned = false;
};

/// Mean and sample standard deviation (n-1) of time_ms; mean of delta_kb over
/// attempts with memory readings.
inline BenchReport summarize(std::span<const AttemptRecord> records) {
    if (records.empty()) fail(Errc::invalid_input, "cannot summarize zero attempts");
    BenchReport r;
    r.records.assign(records.begin(), records.end());
    const double n = static_cast<double>(records.size());
    double sum = 0.0;
    for (const auto& a : records) sum += a.time_ms;
    r.mean_time_ms = sum / n;
    if (records.size() > 1) {
        double ss = 0.0;
        for (const auto& a : records) ss += (a.time_ms - r.mean_time_ms) * (a.time_ms - r.mean_time_ms);
        r.stddev_time_ms = std::sqrt(ss / (n - 1.0));
        r.stddev_defined = true;
    }
    double dsum = 0.0;
    std::size_t dn = 0;
    for (const auto& a : records) {
        if (!a.mem_available()) continue;
        dsum += static_cast<double>(a.delta_kb);
        ++dn;
    }
    r.mem_available = dn == records.size();
    r.mean_delta_kb = dn > 0 ? dsum / static_cast<double>(dn) : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Workload runs
// ---------------------------------------------------------------------------

struct RunOptions {
    bool warmup = true;  // one discarded attempt before the recorded ones
    ParallelOptions parallel;
};

namespace detail {
template <class Body>
BenchReport timed_attempts(const WorkloadSpec& spec, const RunOptions& opts, Body&& body) {
    using clock = std::chrono::steady_clock;
    bool pinned = false;
    if (opts.warmup) (void)body(pinned);
    std::vector<AttemptRecord> recs;
    recs.reserve(spec.attempts);
    for (std::size_t a = 1; a <= spec.attempts; ++a) {
        AttemptRecord rec;
        rec.attempt = a;
        rec.mem_before_kb = measure_memory();
        const auto t0 = clock::now();
        const std::uint64_t acc = body(pinned);
        const auto t1 = clock::now();
        rec.mem_after_kb = measure_memory();
        rec.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        rec.checksum = wrap16(acc);
        rec.delta_kb = rec.mem_available() ? rec.mem_after_kb - rec.mem_before_kb : kMemUnavailable;
        recs.push_back(rec);
    }
    BenchReport r = summarize(recs);
    r.spec = spec;
    r.pinned = pinned;
    return r;
}

inline std::uint64_t add_u64(std::uint64_t a, std::uint64_t b) noexcept { return a + b; }
} // namespace detail

inline BenchReport run_loop(const WorkloadSpec& spec, const RunOptions& opts = {}) {
    validate(spec);
    const PartitionPlan plan = make_partitions(spec.size, spec.partitions);
    return detail::timed_attempts(spec, opts, [&](bool& pinned) {
        auto out = try_run_parallel<std::uint64_t>(plan, loop_partial, opts.parallel);
        if (!out.faults.empty()) throw PartitionFaultError<std::uint64_t>(std::move(out));
        pinned = out.pinned;
        std::uint64_t acc = 0;
        for (auto& p : out.partials) acc += *p;
        return acc;
    });
}

inline BenchReport run_recursion(const WorkloadSpec& spec, const RunOptions& opts = {}) {
    validate(spec);
    const std::size_t chunk = effective_chunk(spec);
    const std::size_t chains = spec.size / chunk;
    const PartitionPlan plan = make_partitions(chains, spec.partitions);
    return detail::timed_attempts(spec, opts, [&](bool& pinned) {
        auto out = try_run_parallel<std::uint64_t>(
            plan, [chunk](Range r) { return recursion_partial(r, chunk); }, opts.parallel);
        if (!out.faults.empty()) throw PartitionFaultError<std::uint64_t>(std::move(out));
        pinned = out.pinned;
        std::uint64_t acc = 0;
        for (auto& p : out.partials) acc += *p;
        return acc;
    });
}

inline BenchReport run_matrix(const WorkloadSpec& spec, const RunOptions& opts = {}) {
    validate(spec);
    const std::size_t n = spec.size;
    const IntMatrix a = seeded_matrix(n, spec.seed);
    const IntMatrix b = seeded_matrix(n, spec.seed);
    std::vector<std::int64_t> product(n * n);
    const PartitionPlan plan = make_partitions(n, spec.partitions);
    return detail::timed_attempts(spec, opts, [&](bool& pinned) {
        auto out = try_run_parallel<std::uint64_t>(
            plan, [&](Range rows) { return matrix_rows(a, b, rows, product); }, opts.parallel);
        if (!out.faults.empty()) throw PartitionFaultError<std::uint64_t>(std::move(out));
        pinned = out.pinned;
        std::uint64_t acc = 0;
        for (auto& p : out.partials) acc += *p;
        return acc;
    });
}

inline BenchReport run_workload(const WorkloadSpec& spec, const RunOptions& opts = {}) {
    switch (spec.kind) {
    case WorkloadKind::loop: return run_loop(spec, opts);
    case WorkloadKind::recursion:
    case WorkloadKind::deep_recursion: return run_recursion(spec, opts);
    case WorkloadKind::matrix: return run_matrix(spec, opts);
    default: break;
    }
    fail(Errc::invalid_input, std::string(to_string(spec.kind)) + " is an allocation experiment");
}

// ---------------------------------------------------------------------------
// Allocation experiments
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::size_t sweep_interval = 500;
    // Uses before a slot expires, per zone (R, G, B); 0 = never (Green expires once at teardown).
    std::array<std::uint32_t, 3> ttl{1, 0, 2};
    // Zone request probabilities for zone_pressure (R, G, B).
    std::array<double, 3> pressure_mix{0.1, 0.7, 0.2};
    std::uint64_t pressure_seed = 42;
};

struct AllocReport {
    WorkloadKind kind = WorkloadKind::alloc_reuse;
    std::size_t size = 0;
    std::string schedule;
    std::array<PoolStats, 3> zones{};  // indexed by zone_index
    std::size_t sweeps = 0;
    double time_ms = 0.0;

    const PoolStats& operator[](ZoneId z) const noexcept { return zones[zone_index(z)]; }
};

namespace detail {
// Uniform double in [0, 1) from the top 53 bits.
inline double unit_interval(std::mt19937_64& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void serve_and_release(ZoneManager& zm, ZoneId z, std::string_view site, LogicalClock& clock) {
    const ObjectHandle h = zm.allocate(z, site, {}, clock.now());
    zm.record_event(h, EventKind::access, clock.now());
    zm.release(h);
    clock.tick();
}
} // namespace detail

/// Drives the zone manager through the scripted schedule for an allocation
/// experiment kind and returns per-zone pool statistics. `size` is the total
/// request count for alloc_reuse / zone_pressure / zone_imbalance and the
/// per-zone request count for expiration / checkpoint_lifecycle. With
/// `snapshot`, the live checkpoint entries are dumped once the run ends.
inline AllocReport run_alloc_experiments(const WorkloadSpec& spec, const ZoneConfig& zcfg = {},
                                         const ExperimentConfig& xcfg = {}, std::ostream* snapshot = nullptr) {
    if (!is_alloc_kind(spec.kind))
        fail(Errc::invalid_input, std::string(to_string(spec.kind)) + " is not an allocation experiment");
    ZoneManager zm(zcfg);
    LogicalClock clock;
    AllocReport rep;
    rep.kind = spec.kind;
    rep.size = spec.size;
    const auto t0 = std::chrono::steady_clock::now();

    switch (spec.kind) {
    case WorkloadKind::alloc_reuse:
        rep.schedule = "sequential acquire/release of one Green site";
        for (std::size_t i = 0; i < spec.size; ++i) detail::serve_and_release(zm, ZoneId::green, "reuse", clock);
        break;

    case WorkloadKind::zone_pressure: {
        const std::uint64_t seed = spec.seed != 0 ? spec.seed : xcfg.pressure_seed;
        const auto& mix = xcfg.pressure_mix;
        std::ostringstream os;
        os << "seeded zone draw G/B/R = " << mix[1] << '/' << mix[2] << '/' << mix[0] << ", seed " << seed;
        rep.schedule = os.str();
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < spec.size; ++i) {
            const double u = detail::unit_interval(rng);
            const ZoneId z = u < mix[1] ? ZoneId::green : (u < mix[1] + mix[2] ? ZoneId::blue : ZoneId::red);
            detail::serve_and_release(zm, z, "pressure", clock);
        }
        break;
    }

    case WorkloadKind::zone_imbalance:
        rep.schedule = "repeating block of 90 Green, 9 Blue, 1 Red";
        for (std::size_t i = 0; i < spec.size; ++i) {
            const std::size_t k = i % 100;
            const ZoneId z = k < 90 ? ZoneId::green : (k < 99 ? ZoneId::blue : ZoneId::red);
            detail::serve_and_release(zm, z, "imbalance", clock);
        }
        break;

    case WorkloadKind::expiration: {
        std::ostringstream os;
        os << "per-zone use-count TTL: Green " << (xcfg.ttl[1] == 0 ? std::string("inf (teardown expiry)") : std::to_string(xcfg.ttl[1]))
           << ", Blue " << xcfg.ttl[2] << ", Red " << xcfg.ttl[0];
        rep.schedule = os.str();
        for (std::size_t i = 0; i < spec.size; ++i) {
            for (ZoneId z : {ZoneId::green, ZoneId::blue, ZoneId::red}) {
                const ObjectHandle h = zm.allocate(z, "ttl", {}, clock.now());
                zm.record_event(h, EventKind::access, clock.now());
                const std::uint32_t ttl = xcfg.ttl[zone_index(z)];
                const std::uint32_t used = ++zm.uses(h);
                const bool teardown = ttl == 0 && i + 1 == spec.size;
                if ((ttl != 0 && used >= ttl) || teardown) zm.expire(h);
                else zm.release(h);
                clock.tick();
            }
        }
        break;
    }

    case WorkloadKind::checkpoint_lifecycle: {
        const std::size_t every = xcfg.sweep_interval;
        if (every == 0) fail(Errc::invalid_config, "sweep interval must be at least 1");
        rep.schedule = "epoch sweep every " + std::to_string(every) +
                       " steps; Green pinned persistent, Blue idle at sweep expires, Red expires per use";
        for (std::size_t i = 0; i < spec.size; ++i) {
            const bool sweep_due = (i + 1) % every == 0;

            const ObjectHandle g = zm.allocate(ZoneId::green, "lifecycle", {}, clock.now());
            zm.record_event(g, EventKind::access, clock.now());
            zm.signal(g, {.persistent = true});
            zm.release(g);

            const ObjectHandle b = zm.allocate(ZoneId::blue, "lifecycle", {}, clock.now());
            zm.record_event(b, EventKind::access, clock.now());
            zm.signal(b, {.accessed = true});
            if (sweep_due) zm.signal(b, {});  // finished with, still live: idle at the sweep
            else zm.release(b);

            const ObjectHandle r = zm.allocate(ZoneId::red, "lifecycle", {}, clock.now());
            zm.record_event(r, EventKind::access, clock.now());
            zm.expire(r);

            clock.tick();
            if (sweep_due) {
                zm.collect(clock.now());
                ++rep.sweeps;
            }
        }
        break;
    }

    default: break;
    }

    rep.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (ZoneId z : kZones) rep.zones[zone_index(z)] = zm.pool_stats(z);
    if (snapshot != nullptr) zm.dump_snapshot(*snapshot);
    return rep;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Format : std::uint8_t { csv, markdown };

inline Format parse_format(std::string_view s) {
    if (s == "csv") return Format::csv;
    if (s == "markdown" || s == "md") return Format::markdown;
    fail(Errc::invalid_input, "unknown format '" + std::string(s) + "'");
}

namespace detail {
// Shortest text that parses back to the same double.
inline std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string kb(std::int64_t v) { return v == kMemUnavailable ? "n/a" : std::to_string(v); }
} // namespace detail

inline constexpr std::string_view kAttemptCsvHeader = "attempt,time_ms,checksum,mem_before_kb,mem_after_kb,delta_kb";

/// CSV: header, one row per attempt, a `mean` row and (with two or more
/// attempts) a `stddev` row. Markdown mirrors the six-column attempt table.
inline std::string emit_report(const BenchReport& r, Format format) {
    std::ostringstream os;
    if (format == Format::csv) {
        os << kAttemptCsvHeader << '\n';
        for (const auto& a : r.records)
            os << a.attempt << ',' << detail::shortest(a.time_ms) << ',' << a.checksum << ',' << detail::kb(a.mem_before_kb)
               << ',' << detail::kb(a.mem_after_kb) << ',' << detail::kb(a.delta_kb) << '\n';
        os << "mean," << detail::shortest(r.mean_time_ms) << ",,,,"
           << (r.mem_available ? detail::shortest(r.mean_delta_kb) : std::string("n/a")) << '\n';
        if (r.stddev_defined) os << "stddev," << detail::shortest(r.stddev_time_ms) << ",,,,\n";
        return os.str();
    }
    os << "| Attempt | Time (ms) | Checksum | MemBefore (KB) | MemAfter (KB) | Delta (KB) |\n";
    os << "|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& a : r.records)
        os << "| " << a.attempt << " | " << detail::fixed(a.time_ms, 6) << " | " << a.checksum << " | "
           << detail::kb(a.mem_before_kb) << " | " << detail::kb(a.mem_after_kb) << " | " << detail::kb(a.delta_kb)
           << " |\n";
    os << "| **Mean** | **" << detail::fixed(r.mean_time_ms, 5) << "** | | | | **"
       << (r.mem_available ? detail::shortest(r.mean_delta_kb) : std::string("n/a")) << "** |\n";
    os << "| **StdDev** | **" << (r.stddev_defined ? detail::fixed(r.stddev_time_ms, 5) : std::string("n/a"))
       << "** | | | | |\n";
    return os.str();
}

namespace detail {
inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t at = line.find(sep, start);
        out.push_back(line.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
        if (at == std::string_view::npos) break;
        start = at + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail(Errc::invalid_input, "bad number '" + std::string(s) + "' in report");
    return v;
}

inline std::int64_t parse_kb(std::string_view s) { return s == "n/a" ? kMemUnavailable : parse_number<std::int64_t>(s); }
} // namespace detail

// Reads back what emit_report(..., Format::csv) writes. Lines starting with '#' are skipped.
inline BenchReport parse_csv_report(std::string_view text) {
    BenchReport r;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kAttemptCsvHeader) fail(Errc::invalid_input, "unexpected report header");
            header_seen = true;
            continue;
        }
        const auto f = detail::split(line, ',');
        if (f.size() != 6) fail(Errc::invalid_input, "report rows need six columns");
        if (f[0] == "mean") {
            r.mean_time_ms = detail::parse_number<double>(f[1]);
            r.mem_available = f[5] != "n/a";
            r.mean_delta_kb = r.mem_available ? detail::parse_number<double>(f[5]) : 0.0;
        } else if (f[0] == "stddev") {
            r.stddev_time_ms = detail::parse_number<double>(f[1]);
            r.stddev_defined = true;
        } else {
            AttemptRecord a;
            a.attempt = detail::parse_number<std::size_t>(f[0]);
            a.time_ms = detail::parse_number<double>(f[1]);
            a.checksum = detail::parse_number<std::int16_t>(f[2]);
            a.mem_before_kb = detail::parse_kb(f[3]);
            a.mem_after_kb = detail::parse_kb(f[4]);
            a.delta_kb = detail::parse_kb(f[5]);
            r.records.push_back(a);
        }
    }
    if (!header_seen) fail(Errc::invalid_input, "empty report");
    return r;
}

// Zone rows in the order Green, Blue, Red.
inline std::string emit_alloc_report(const AllocReport& r, Format format) {
    std::ostringstream os;
    constexpr std::array<ZoneId, 3> order{ZoneId::green, ZoneId::blue, ZoneId::red};
    if (format == Format::csv) {
        os << "# " << to_string(r.kind) << " size=" << r.size << " schedule: " << r.schedule << '\n';
        os << kPoolStatsCsvHeader << '\n';
        for (ZoneId z : order) os << pool_stats_csv_row(z, r[z]) << '\n';
        return os.str();
    }
    os << "Schedule: " << r.schedule << "\n\n";
    os << "| Zone | Total Requests | Real Allocations | Reused Objects | Expired Objects | Pool Size |\n";
    os << "|---|---:|---:|---:|---:|---:|\n";
    for (ZoneId z : order) {
        const PoolStats& s = r[z];
        os << "| " << zone_name(z) << " | " << s.total_requests << " | " << s.real_allocations << " | "
           << s.reused_objects << " | " << s.expired_objects << " | " << s.pool_size << " |\n";
    }
    return os.str();
}

} // namespace vgc::bench
