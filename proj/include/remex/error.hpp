#pragma once

#include <stdexcept>
#include <string>

namespace remex {

/// Error categories used across the library. Each maps to a named
/// failure mode of one or more operations.
enum class Errc {
  player_in_set,
  index_out_of_range,
  dimension_mismatch,
  dimension_too_large,
  singular_system,
  non_finite_loss,
  non_finite_value,
  zero_probability_input,
  empty_background,
  empty_dataset,
  support_too_large,
  no_matching_rows,
  kind_mismatch,
  zero_sum,
  infeasible,
  non_convergence,
  invalid_ranking,
  constant_vector,
  unsupported,
  config_error,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::player_in_set: return "PlayerInSet";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::dimension_too_large: return "DimensionTooLarge";
    case Errc::singular_system: return "SingularSystem";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::non_finite_value: return "NonFiniteValue";
    case Errc::zero_probability_input: return "ZeroProbabilityInput";
    case Errc::empty_background: return "EmptyBackground";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::support_too_large: return "SupportTooLarge";
    case Errc::no_matching_rows: return "NoMatchingRows";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::zero_sum: return "ZeroSum";
    case Errc::infeasible: return "Infeasible";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::invalid_ranking: return "InvalidRanking";
    case Errc::constant_vector: return "ConstantVector";
    case Errc::unsupported: return "Unsupported";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace remex
