// Error codes and exception type shared by all dermarket modules.
#pragma once

#include <stdexcept>
#include <string>

namespace dermarket {

enum class Errc {
  // curves / market data
  non_finite_price,
  empty_curve,
  // optimization
  infeasible,
  unbounded_model,
  gap_not_closed,
  non_positive_big_m,
  grid_too_large,
  dimension_mismatch,
  // distributionally robust layer
  empty_samples,
  separation_stalled,
  infeasible_moments,
  // feeder / power flow
  cycle_detected,
  disconnected_node,
  bad_units,
  sweep_diverged,
  empty_capability,
  // scenario / traces
  misaligned_grids,
  trace_gap,
  unit_mismatch,
  // configuration / io
  unknown_key,
  missing_file,
  bad_value,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::non_finite_price: return "NonFinitePrice";
    case Errc::empty_curve: return "EmptyCurve";
    case Errc::infeasible: return "Infeasible";
    case Errc::unbounded_model: return "UnboundedModel";
    case Errc::gap_not_closed: return "GapNotClosed";
    case Errc::non_positive_big_m: return "NonPositiveBigM";
    case Errc::grid_too_large: return "GridTooLarge";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_samples: return "EmptySamples";
    case Errc::separation_stalled: return "SeparationStalled";
    case Errc::infeasible_moments: return "InfeasibleMoments";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::disconnected_node: return "DisconnectedNode";
    case Errc::bad_units: return "BadUnits";
    case Errc::sweep_diverged: return "SweepDiverged";
    case Errc::empty_capability: return "EmptyCapability";
    case Errc::misaligned_grids: return "MisalignedGrids";
    case Errc::trace_gap: return "TraceGap";
    case Errc::unit_mismatch: return "UnitMismatch";
    case Errc::unknown_key: return "UnknownKey";
    case Errc::missing_file: return "MissingFile";
    case Errc::bad_value: return "BadValue";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace dermarket
