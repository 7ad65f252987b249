#pragma once

#include <stdexcept>
#include <string>

namespace bsdlab {

enum class Errc {
  empty_support,
  out_of_interval,
  bad_weights,
  degree_cap_exceeded,
  interval_mismatch,
  evaluation_domain,
  derivative_order_unavailable,
  vanishing_first_derivative,
  bad_order,
  negative_base,
  not_convex,
  not_decreasing,
  infeasible,
  iteration_limit,
  unsupported_direction,
  precondition_violated,
  parse_error,
  numerical_failure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::empty_support: return "EmptySupport";
    case Errc::out_of_interval: return "OutOfInterval";
    case Errc::bad_weights: return "BadWeights";
    case Errc::degree_cap_exceeded: return "DegreeCapExceeded";
    case Errc::interval_mismatch: return "IntervalMismatch";
    case Errc::evaluation_domain: return "EvaluationDomain";
    case Errc::derivative_order_unavailable: return "DerivativeOrderUnavailable";
    case Errc::vanishing_first_derivative: return "VanishingFirstDerivative";
    case Errc::bad_order: return "BadOrder";
    case Errc::negative_base: return "NegativeBase";
    case Errc::not_convex: return "NotConvex";
    case Errc::not_decreasing: return "NotDecreasing";
    case Errc::infeasible: return "Infeasible";
    case Errc::iteration_limit: return "IterationLimit";
    case Errc::unsupported_direction: return "UnsupportedDirection";
    case Errc::precondition_violated: return "PreconditionViolated";
    case Errc::parse_error: return "ParseError";
    case Errc::numerical_failure: return "NumericalFailure";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace bsdlab
