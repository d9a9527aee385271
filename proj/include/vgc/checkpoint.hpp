#pragma once

#include <array>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "vgc/error.hpp"
#include "vgc/layout.hpp"
#include "vgc/object_model.hpp"

namespace vgc {

// ---------------------------------------------------------------------------
// Three-bit lifecycle states
// ---------------------------------------------------------------------------

enum class StateCode : std::uint8_t {
    idle = 0b000,
    active = 0b001,
    promote_candidate = 0b010,
    demote_candidate = 0b011,
    persistent = 0b100,
    deferred = 0b101,
    marked = 0b110,
    expired = 0b111,
};

enum class Action : std::uint8_t {
    wait_sleep,
    keep_alive,
    evaluate,
    keep_stay,
    defer_sweep,
    prepare_for_deletion,
    reclaim_immediately,
};

constexpr unsigned bits(StateCode s) noexcept { return static_cast<unsigned>(s); }

inline StateCode state_from_bits(unsigned v) {
    if (v > 7) fail(Errc::out_of_range, "checkpoint state must fit in three bits");
    return static_cast<StateCode>(v);
}

constexpr Action action_of(StateCode s) noexcept {
    switch (s) {
    case StateCode::idle: return Action::wait_sleep;
    case StateCode::active: return Action::keep_alive;
    case StateCode::promote_candidate:
    case StateCode::demote_candidate: return Action::evaluate;
    case StateCode::persistent: return Action::keep_stay;
    case StateCode::deferred: return Action::defer_sweep;
    case StateCode::marked: return Action::prepare_for_deletion;
    case StateCode::expired: return Action::reclaim_immediately;
    }
    return Action::wait_sleep;
}

constexpr std::string_view meaning(StateCode s) noexcept {
    switch (s) {
    case StateCode::idle: return "Idle";
    case StateCode::active: return "Active";
    case StateCode::promote_candidate: return "Candidate for promotion";
    case StateCode::demote_candidate: return "Candidate for demotion";
    case StateCode::persistent: return "Persistent";
    case StateCode::deferred: return "Deferred";
    case StateCode::marked: return "Marked";
    case StateCode::expired: return "Expired";
    }
    return "?";
}

constexpr std::string_view to_string(Action a) noexcept {
    switch (a) {
    case Action::wait_sleep: return "Wait/Sleep";
    case Action::keep_alive: return "Keep Alive";
    case Action::evaluate: return "Evaluate";
    case Action::keep_stay: return "Keep Stay";
    case Action::defer_sweep: return "Defer Sweep";
    case Action::prepare_for_deletion: return "Prepare for Deletion";
    case Action::reclaim_immediately: return "Reclaim Immediately";
    }
    return "?";
}

inline std::string to_bit_string(StateCode s) {
    const unsigned v = bits(s);
    return {char('0' + ((v >> 2) & 1)), char('0' + ((v >> 1) & 1)), char('0' + (v & 1))};
}

// Gate operands derived from a state: S marks keep-alive states, P the deferred state.
constexpr bool keeps_alive(StateCode s) noexcept {
    switch (s) {
    case StateCode::active:
    case StateCode::promote_candidate:
    case StateCode::demote_candidate:
    case StateCode::persistent: return true;
    default: return false;
    }
}
constexpr bool is_pending(StateCode s) noexcept { return s == StateCode::deferred; }

struct Signals {
    bool accessed = false;
    bool persistent = false;
    bool sweep_scheduled = false;
    bool expired = false;
};

struct Step {
    StateCode next;
    Action action;
    friend bool operator==(const Step&, const Step&) = default;
};

/// Next state for the given signals; the action is the one attached to the
/// resulting state. Priority: expired, sweep, persistent, accessed. A deferred
/// entry with no signal stays deferred; anything else goes idle.
inline Step step_state(StateCode current, const Signals& sig) {
    if (sig.expired && sig.accessed)
        fail(Errc::signal_conflict, "an object cannot be both accessed and expired in one step");
    StateCode next = StateCode::idle;
    if (sig.expired) next = StateCode::expired;
    else if (sig.sweep_scheduled) next = StateCode::marked;
    else if (sig.persistent) next = StateCode::persistent;
    else if (sig.accessed) next = StateCode::active;
    else if (current == StateCode::deferred) next = StateCode::deferred;
    return {next, action_of(next)};
}

struct Transition {
    bool changed;
    bool stable;
};

// XOR across epochs detects a change; XNOR over all bits reports stability.
constexpr Transition transition_detect(StateCode prev, StateCode cur) noexcept {
    const unsigned diff = (bits(prev) ^ bits(cur)) & 0b111u;
    const unsigned same = ~(bits(prev) ^ bits(cur)) & 0b111u;
    return {diff != 0, same == 0b111u};
}

// ---------------------------------------------------------------------------
// Address and index mapping
// ---------------------------------------------------------------------------

// Index(o) = (Address(o) - Base) / 16
inline std::size_t index_of(std::uint64_t address, std::uint64_t base, std::size_t capacity) {
    if (address < base) fail(Errc::out_of_range, "address below table base");
    const std::uint64_t offset = address - base;
    if (offset % kObjectAlignment != 0) fail(Errc::alignment, "address is not 16-byte aligned");
    const std::uint64_t index = offset / kObjectAlignment;
    if (index >= capacity) fail(Errc::out_of_range, "index beyond checkpoint table capacity");
    return static_cast<std::size_t>(index);
}

inline ZoneId zone_of_index(std::size_t i, const ZoneLayout& layout) {
    const std::size_t nr = layout.entries[0];
    const std::size_t ng = layout.entries[1];
    if (i >= layout.capacity()) fail(Errc::out_of_range, "index outside every zone region");
    if (i < nr) return ZoneId::red;
    if (i < nr + ng) return ZoneId::green;
    return ZoneId::blue;
}

inline Generation generation_of(std::size_t i, ZoneId zone, const ZoneLayout& layout) {
    const std::size_t start = layout.start(zone);
    if (i < start || i >= layout.end(zone)) fail(Errc::out_of_range, "index outside its zone");
    const std::size_t off = i - start;
    if (off < layout.gen1_offset(zone)) return Generation::gen0;
    if (off < layout.gen2_offset(zone)) return Generation::gen1;
    return Generation::gen2;
}

inline Generation generation_of(std::size_t i, const ZoneLayout& layout) {
    return generation_of(i, zone_of_index(i, layout), layout);
}

// Partition p of zone z covers [start + floor(p*N/P), start + floor((p+1)*N/P)).
inline std::size_t partition_of(std::size_t i, const ZoneLayout& layout) {
    const ZoneId z = zone_of_index(i, layout);
    const std::size_t n = layout.size(z);
    const std::size_t parts = layout.partitions[zone_index(z)];
    const std::size_t x = i - layout.start(z);
    // Largest p with floor(p*n/parts) <= x.
    const auto num = static_cast<unsigned __int128>(x + 1) * parts;
    return static_cast<std::size_t>((num + n - 1) / n) - 1;
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

namespace gates {
constexpr std::uint64_t and_(std::uint64_t a, std::uint64_t b) noexcept { return a & b; }
constexpr std::uint64_t or_(std::uint64_t a, std::uint64_t b) noexcept { return a | b; }
constexpr std::uint64_t not_(std::uint64_t a) noexcept { return ~a; }
constexpr std::uint64_t xor_(std::uint64_t a, std::uint64_t b) noexcept { return a ^ b; }
constexpr std::uint64_t xnor(std::uint64_t a, std::uint64_t b) noexcept { return ~(a ^ b); }
constexpr std::uint64_t nand(std::uint64_t a, std::uint64_t b) noexcept { return ~(a & b); }
constexpr std::uint64_t nor(std::uint64_t a, std::uint64_t b) noexcept { return ~(a | b); }
} // namespace gates

// O = (S and Z) or (not S and P)
constexpr std::uint64_t eval_liveness_gate(std::uint64_t s, std::uint64_t z, std::uint64_t p) noexcept {
    return (s & z) | (~s & p);
}
constexpr bool eval_liveness_gate(bool s, bool z, bool p) noexcept { return (s && z) || (!s && p); }

/// Fixed-width bit vector, used for lanewise gate evaluation and per-worker sync results.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t width, bool value = false)
        : width_(width), words_((width + 63) / 64, value ? ~std::uint64_t{0} : 0) {
        trim();
    }

    static BitVector from_string(std::string_view s) {
        BitVector v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '0' && s[i] != '1') fail(Errc::invalid_input, "bit string must contain only 0/1");
            v.set(i, s[i] == '1');
        }
        return v;
    }

    std::size_t width() const noexcept { return width_; }
    bool get(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1u; }
    void set(std::size_t i, bool b) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (i % 64);
        words_[i / 64] = b ? (words_[i / 64] | m) : (words_[i / 64] & ~m);
    }
    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    std::vector<std::uint64_t>& words() noexcept { return words_; }

    // Clears bits past `width` in the final word.
    void trim() noexcept {
        if (width_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
    }

    std::string to_string() const {
        std::string s(width_, '0');
        for (std::size_t i = 0; i < width_; ++i) s[i] = get(i) ? '1' : '0';
        return s;
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    std::size_t width_ = 0;
    std::vector<std::uint64_t> words_;
};

inline BitVector eval_liveness_gate(const BitVector& s, const BitVector& z, const BitVector& p) {
    if (s.width() != z.width() || s.width() != p.width())
        fail(Errc::shape, "gate operands must have equal width");
    BitVector out(s.width());
    for (std::size_t w = 0; w < out.words().size(); ++w)
        out.words()[w] = eval_liveness_gate(s.words()[w], z.words()[w], p.words()[w]);
    out.trim();
    return out;
}

template <class T>
struct ZoneMasks {
    T red;
    T green;
    T blue;
    friend bool operator==(const ZoneMasks&, const ZoneMasks&) = default;
};

// R' = (R and not B) or (R and G);  G' = (G or R) and not B;  B' = B and not G
template <class T>
constexpr ZoneMasks<T> zone_mask_update(T r, T g, T b) noexcept {
    if constexpr (std::is_same_v<T, bool>) {
        return {(r && !b) || (r && g), (g || r) && !b, b && !g};
    } else {
        return {static_cast<T>((r & ~b) | (r & g)), static_cast<T>((g | r) & ~b), static_cast<T>(b & ~g)};
    }
}

// ---------------------------------------------------------------------------
// Packed checkpoint table
// ---------------------------------------------------------------------------

struct SweepMasks {
    std::array<bool, 3> zone_active{true, true, true};  // Z per zone
    std::array<bool, 3> pending{true, true, true};      // P enabled per zone (applies to 101 entries)
};

struct SweepReport {
    std::size_t evaluated = 0;
    std::vector<std::size_t> reclaimed;
    std::uint64_t epoch = 0;
};

/// Global table of 3-bit states, laid out as [R | G | B] over ZoneLayout.
///
/// Entries pack 21 to a 64-bit word (bit 63 unused) so no entry straddles a
/// word. Word updates are compare-and-swap, so workers owning disjoint index
/// intervals can update concurrently; only words on interval boundaries ever
/// see contention.
class CheckpointTable {
public:
    static constexpr unsigned kBitsPerEntry = 3;
    static constexpr std::size_t kEntriesPerWord = 21;
    // Lowest bit of each of the 21 lanes.
    static constexpr std::uint64_t kLaneLsb = 0x1249249249249249ULL;

    CheckpointTable() = default;
    explicit CheckpointTable(const ZoneLayout& layout, std::uint64_t base = 0)
        : layout_(layout), base_(base), size_(layout.capacity()), words_(word_count_for(size_)) {
        words_storage_ = std::make_unique<std::atomic<std::uint64_t>[]>(words_);
        for (std::size_t w = 0; w < words_; ++w) words_storage_[w].store(0, std::memory_order_relaxed);
    }

    CheckpointTable(CheckpointTable&&) noexcept = default;
    CheckpointTable& operator=(CheckpointTable&&) noexcept = default;

    std::size_t size() const noexcept { return size_; }
    std::size_t word_count() const noexcept { return words_; }
    std::uint64_t base() const noexcept { return base_; }
    std::uint64_t epoch() const noexcept { return epoch_; }
    const ZoneLayout& layout() const noexcept { return layout_; }

    static constexpr std::size_t word_count_for(std::size_t entries) noexcept {
        return (entries + kEntriesPerWord - 1) / kEntriesPerWord;
    }

    std::uint64_t word(std::size_t w) const noexcept { return words_storage_[w].load(std::memory_order_acquire); }

    StateCode get(std::size_t i) const {
        check(i);
        const auto w = word(i / kEntriesPerWord);
        return static_cast<StateCode>((w >> shift(i)) & 0b111u);
    }

    void set(std::size_t i, StateCode s) {
        check(i);
        auto& cell = words_storage_[i / kEntriesPerWord];
        const unsigned sh = shift(i);
        const std::uint64_t clear = ~(std::uint64_t{0b111} << sh);
        const std::uint64_t put = std::uint64_t{bits(s)} << sh;
        std::uint64_t cur = cell.load(std::memory_order_relaxed);
        while (!cell.compare_exchange_weak(cur, (cur & clear) | put, std::memory_order_acq_rel,
                                           std::memory_order_relaxed)) {
        }
    }

    bool compare_exchange(std::size_t i, StateCode expected, StateCode desired) {
        check(i);
        auto& cell = words_storage_[i / kEntriesPerWord];
        const unsigned sh = shift(i);
        const std::uint64_t clear = ~(std::uint64_t{0b111} << sh);
        std::uint64_t cur = cell.load(std::memory_order_relaxed);
        for (;;) {
            if (((cur >> sh) & 0b111u) != bits(expected)) return false;
            const std::uint64_t next = (cur & clear) | (std::uint64_t{bits(desired)} << sh);
            if (cell.compare_exchange_weak(cur, next, std::memory_order_acq_rel, std::memory_order_relaxed))
                return true;
        }
    }

    /// Evaluates O = (S & Z) | (~S & P) across every lane of every word in
    /// [begin, end) and appends indices that are dead and expired (111).
    /// Constant work per entry; no reference traversal. Returns entries evaluated.
    std::size_t sweep_range(std::size_t begin, std::size_t end, const SweepMasks& masks,
                            std::vector<std::size_t>& reclaimed) const {
        if (end > size_ || begin > end) fail(Errc::out_of_range, "sweep range outside table");
        if (begin == end) return 0;
        const std::size_t first = begin / kEntriesPerWord;
        const std::size_t last = (end - 1) / kEntriesPerWord;
        for (std::size_t w = first; w <= last; ++w) {
            const std::size_t wbeg = w * kEntriesPerWord;
            const std::size_t wend = wbeg + kEntriesPerWord;
            const std::uint64_t valid = lane_mask(begin > wbeg ? begin - wbeg : 0,
                                                  end < wend ? end - wbeg : kEntriesPerWord);
            std::uint64_t z = 0;
            std::uint64_t pend = 0;
            for (ZoneId zone : kZones) {
                const std::size_t zb = layout_.start(zone);
                const std::size_t ze = layout_.end(zone);
                if (ze <= wbeg || zb >= wend) continue;
                const std::uint64_t lanes =
                    lane_mask(zb > wbeg ? zb - wbeg : 0, ze < wend ? ze - wbeg : kEntriesPerWord);
                if (masks.zone_active[zone_index(zone)]) z |= lanes;
                if (masks.pending[zone_index(zone)]) pend |= lanes;
            }
            const std::uint64_t v = word(w);
            const std::uint64_t b0 = v & kLaneLsb;
            const std::uint64_t b1 = (v >> 1) & kLaneLsb;
            const std::uint64_t b2 = (v >> 2) & kLaneLsb;
            // keep-alive states: 001, 010, 011, 100
            const std::uint64_t s = ((~b2 & (b1 | b0)) | (b2 & ~b1 & ~b0)) & kLaneLsb;
            const std::uint64_t p = b2 & ~b1 & b0 & pend;
            const std::uint64_t out = eval_liveness_gate(s, z, p) & kLaneLsb;
            std::uint64_t dead_expired = ~out & b2 & b1 & b0 & valid;
            while (dead_expired != 0) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(dead_expired));
                reclaimed.push_back(wbeg + bit / kBitsPerEntry);
                dead_expired &= dead_expired - 1;
            }
        }
        return end - begin;
    }

    SweepReport epoch_sweep(const SweepMasks& masks) {
        SweepReport r;
        r.evaluated = sweep_range(0, size_, masks, r.reclaimed);
        r.epoch = ++epoch_;
        return r;
    }

    // Text snapshot: `index state zone generation`, ascending index, entries selected by `keep`.
    template <class Pred>
    void dump(std::ostream& os, Pred keep) const {
        for (std::size_t i = 0; i < size_; ++i) {
            if (!keep(i)) continue;
            os << i << ' ' << to_bit_string(get(i)) << ' ' << zone_letter(zone_of_index(i, layout_)) << ' '
               << to_string(generation_of(i, layout_)) << '\n';
        }
    }

private:
    static constexpr unsigned shift(std::size_t i) noexcept {
        return static_cast<unsigned>((i % kEntriesPerWord) * kBitsPerEntry);
    }

    // LSBs of lanes [a, b) within a word.
    static constexpr std::uint64_t lane_mask(std::size_t a, std::size_t b) noexcept {
        if (a >= b) return 0;
        const std::uint64_t hi = b >= kEntriesPerWord ? ~std::uint64_t{0} : (std::uint64_t{1} << (b * 3)) - 1;
        const std::uint64_t lo = (std::uint64_t{1} << (a * 3)) - 1;
        return kLaneLsb & hi & ~lo;
    }

    void check(std::size_t i) const {
        if (i >= size_) fail(Errc::out_of_range, "checkpoint index beyond table capacity");
    }

    ZoneLayout layout_{};
    std::uint64_t base_ = 0;
    std::size_t size_ = 0;
    std::size_t words_ = 0;
    std::unique_ptr<std::atomic<std::uint64_t>[]> words_storage_;
    std::uint64_t epoch_ = 0;
};

} // namespace vgc
