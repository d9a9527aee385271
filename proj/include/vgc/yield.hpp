#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <cstring>
#include <new>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "vgc/checkpoint.hpp"
#include "vgc/error.hpp"
#include "vgc/zones.hpp"

namespace vgc {

// The four states a lambda-evaluated value can carry: 000, 001, 100, 101.
class LambdaState {
public:
    static LambdaState from(StateCode s) {
        switch (s) {
        case StateCode::idle:
        case StateCode::active:
        case StateCode::persistent:
        case StateCode::deferred: return LambdaState(s);
        default: break;
        }
        fail(Errc::invalid_lambda_state, "state " + to_bit_string(s) + " is not a lambda state");
    }
    static LambdaState ephemeral() noexcept { return LambdaState(StateCode::idle); }
    static LambdaState active() noexcept { return LambdaState(StateCode::active); }
    static LambdaState persistent() noexcept { return LambdaState(StateCode::persistent); }
    static LambdaState deferred() noexcept { return LambdaState(StateCode::deferred); }

    StateCode code() const noexcept { return code_; }
    friend bool operator==(const LambdaState&, const LambdaState&) = default;

private:
    explicit LambdaState(StateCode s) noexcept : code_(s) {}
    StateCode code_;
};

enum class LambdaZone : std::uint8_t { no_zone, green, red_or_blue };

// 000 and 001 carry no zone; 100 maps to Green; 101 to Red or Blue.
inline LambdaZone map_lambda(LambdaState s) noexcept {
    switch (s.code()) {
    case StateCode::persistent: return LambdaZone::green;
    case StateCode::deferred: return LambdaZone::red_or_blue;
    default: return LambdaZone::no_zone;
    }
}

// A deferred value takes the classifier's zone, with Green folded into Blue.
constexpr ZoneId resolve_deferred(ZoneId classified) noexcept {
    return classified == ZoneId::green ? ZoneId::blue : classified;
}

inline constexpr std::size_t kScratchCellBytes = 16;
inline constexpr std::size_t kDefaultScratchSlots = 4096;

template <class T>
concept ScratchValue = std::is_trivially_copyable_v<T> && sizeof(T) <= kScratchCellBytes &&
                       alignof(T) <= kScratchCellBytes;

struct Promotion {
    ObjectHandle handle;
    LambdaState state;
    std::array<std::byte, kScratchCellBytes> value{};
};

/// Bounded scratch region for short-lived values.
///
/// Nothing evaluated here touches the zone manager or the checkpoint table
/// unless it is promoted. Nested evaluations release their scratch before the
/// enclosing one finishes.
class YieldScope {
public:
    explicit YieldScope(ZoneManager& zones, std::size_t scratch_slots = kDefaultScratchSlots, std::string id = {})
        : zones_(&zones), id_(std::move(id)), cells_(scratch_slots) {}

    YieldScope(const YieldScope&) = delete;
    YieldScope& operator=(const YieldScope&) = delete;
    ~YieldScope() { close(); }

    const std::string& id() const noexcept { return id_; }
    bool is_open() const noexcept { return open_; }
    std::size_t capacity() const noexcept { return cells_.size(); }
    std::size_t slots_in_use() const noexcept { return top_; }
    std::size_t bytes_in_use() const noexcept { return top_ * kScratchCellBytes; }

    // Claims one scratch slot for the duration of the innermost running evaluation.
    template <ScratchValue T, class... Args>
    T& scratch(Args&&... args) {
        require_open();
        if (top_ == cells_.size()) fail(Errc::yield_overflow, "scratch region of scope '" + id_ + "' is full");
        void* p = cells_[top_].bytes;
        ++top_;
        return *::new (p) T(std::forward<Args>(args)...);
    }

    /// Runs `f` (nullary, or taking this scope) and returns its result; the
    /// result is staged in a scratch slot, and every slot claimed during the
    /// call is released when it returns or throws.
    template <class F>
    auto yield_eval(F&& f) {
        require_open();
        const std::size_t mark = top_;
        struct Restore {
            YieldScope* s;
            std::size_t mark;
            ~Restore() { s->top_ = mark; }
        } restore{this, mark};

        if constexpr (std::is_invocable_v<F&, YieldScope&>) {
            using R = std::invoke_result_t<F&, YieldScope&>;
            if constexpr (std::is_void_v<R>) {
                f(*this);
            } else {
                static_assert(ScratchValue<R>, "yield results must fit a scratch cell");
                return R(scratch<R>(f(*this)));
            }
        } else {
            using R = std::invoke_result_t<F&>;
            if constexpr (std::is_void_v<R>) {
                f();
            } else {
                static_assert(ScratchValue<R>, "yield results must fit a scratch cell");
                return R(scratch<R>(f()));
            }
        }
    }

    /// Registers `value` with the checkpoint system. 100 lands in Green;
    /// 101 in the zone the active policy picks for `profile`, Green folded to Blue.
    /// The checkpoint entry is set to the lambda code.
    template <ScratchValue T>
    ObjectHandle promote(const T& value, LambdaState state, const FeatureVector& profile = {},
                         const AllocationInfo& info = {}, double now = 0.0) {
        require_open();
        ZoneId zone = ZoneId::green;
        switch (map_lambda(state)) {
        case LambdaZone::green: zone = ZoneId::green; break;
        case LambdaZone::red_or_blue: zone = resolve_deferred(zones_->classify(profile)); break;
        case LambdaZone::no_zone:
            fail(Errc::invalid_promotion, "only persistent (100) or deferred (101) values can be promoted");
        }
        const ObjectHandle h = zones_->allocate(zone, "yield:" + id_, info, now);
        zones_->set_state(h, state.code());
        Promotion p{h, state, {}};
        std::memcpy(p.value.data(), &value, sizeof(T));
        promoted_.push_back(p);
        return h;
    }

    const std::vector<Promotion>& promoted() const noexcept { return promoted_; }

    // Unpromoted scratch is discarded.
    void close() noexcept {
        top_ = 0;
        open_ = false;
    }

private:
    struct alignas(kScratchCellBytes) Cell {
        std::byte bytes[kScratchCellBytes];
    };

    void require_open() const {
        if (!open_) fail(Errc::lifecycle_violation, "yield scope '" + id_ + "' is closed");
    }

    ZoneManager* zones_;
    std::string id_;
    std::vector<Cell> cells_;
    std::size_t top_ = 0;
    bool open_ = true;
    std::vector<Promotion> promoted_;
};

} // namespace vgc
