#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vgc {

enum class Errc {
    lifecycle_violation,
    alignment,
    out_of_range,
    shape,
    signal_conflict,
    out_of_memory,
    yield_overflow,
    invalid_lambda_state,
    invalid_promotion,
    invalid_topology,
    invalid_plan,
    undefined_objective,
    invalid_sample,
    partition_fault,
    depth_limit,
    invalid_input,
    invalid_config,
};

constexpr std::string_view to_string(Errc e) noexcept {
    switch (e) {
    case Errc::lifecycle_violation: return "lifecycle-violation";
    case Errc::alignment: return "alignment";
    case Errc::out_of_range: return "out-of-range";
    case Errc::shape: return "shape";
    case Errc::signal_conflict: return "signal-conflict";
    case Errc::out_of_memory: return "out-of-memory";
    case Errc::yield_overflow: return "yield-overflow";
    case Errc::invalid_lambda_state: return "invalid-lambda-state";
    case Errc::invalid_promotion: return "invalid-promotion";
    case Errc::invalid_topology: return "invalid-topology";
    case Errc::invalid_plan: return "invalid-plan";
    case Errc::undefined_objective: return "undefined-objective";
    case Errc::invalid_sample: return "invalid-sample";
    case Errc::partition_fault: return "partition-fault";
    case Errc::depth_limit: return "depth-limit";
    case Errc::invalid_input: return "invalid-input";
    case Errc::invalid_config: return "invalid-config";
    }
    return "unknown";
}

// Every failure raised by the library carries one of the error classes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace vgc
