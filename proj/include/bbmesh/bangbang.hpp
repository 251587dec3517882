#pragma once

#include "bbmesh/ocp.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbmesh {

/// Raised when the bang-bang path cannot proceed (singular point, conflicting
/// switching-function signs); the driver falls back to standard refinement.
class RefinementAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearityReport {
  std::vector<std::size_t> linear_indices;
  std::vector<std::size_t> nonlinear_indices;
  /// Per control component: largest spread of dH/du_i over the probe samples,
  /// relative to 1 + |dH/du_i|. Infinite for components that could not be probed.
  std::vector<double> evidence;
  std::vector<std::string> warnings;

  bool is_linear(std::size_t i) const;
};

/// Probes dH/du_i at the lower, middle and upper control value of every
/// component at every collocation point, holding state, costate and the
/// other controls at their collocated values.
LinearityReport detect_linearity(const CollocatedSolution& solution, const BolzaProblem& problem);

struct SignChange {
  std::size_t component = 0;  // control index
  std::size_t domain = 0;
  std::size_t interval = 0;
  /// Collocation indices (within the domain) of the points on either side of
  /// the change. Usually adjacent; when the solve put collocation points on the
  /// root itself (sigma numerically zero there, at most two in a row) the pair
  /// skips over them.
  std::size_t point = 0;
  std::size_t next = 0;
  /// True when the pair straddles a mesh-interval boundary.
  bool across_boundary = false;

  bool through_zero() const { return next > point + 1; }
};

struct SwitchingProfile {
  std::vector<std::size_t> components;
  /// sigma[c][d][l]: switching function of components[c] at collocation point l of domain d.
  std::vector<std::vector<std::vector<double>>> sigma;
  std::vector<SignChange> changes;
  /// Per component: |sigma| below this counts as zero (1e-8 (1 + max |sigma|)).
  std::vector<double> zero_level;

  /// Position of control index i in `components`; throws if absent.
  std::size_t slot(std::size_t i) const;
  /// -1, 0 or +1 with the zero band applied.
  int sign(std::size_t c, std::size_t d, std::size_t l) const;
};

SwitchingProfile switching_functions(const CollocatedSolution& solution, const BolzaProblem& problem,
                                     const LinearityReport& report);

enum class EstimateSource { interior, interval_boundary };

struct DiscontinuityEstimate {
  std::size_t component = 0;
  double time = 0.0;
  EstimateSource source = EstimateSource::interior;
  int sign_before = 0;
  int sign_after = 0;
  double lower = 0.0;
  double upper = 0.0;
  /// Span of the collocation points that produced the estimate.
  double window_start = 0.0;
  double window_end = 0.0;
};

/// Interior rule: average of the sign-change location and the midpoint of the
/// pair with the largest control jump.
inline double combine_estimate(double t_sigma, double t_u) { return 0.5 * (t_sigma + t_u); }

/**
 * Turns sign changes into sorted switch-time estimates with non-overlapping
 * brackets running to the midpoints between neighbouring estimates (t0 and tf
 * at the ends). Estimates of different components at exactly the same time
 * share a bracket. Throws RefinementAborted when a switching function is
 * numerically zero at three or more consecutive collocation points (a possible
 * singular arc). A shorter zero run between points of opposite sign is the
 * root itself and counts as a sign change.
 */
std::vector<DiscontinuityEstimate> estimate_discontinuities(const SwitchingProfile& profile,
                                                            const CollocatedSolution& solution);

/**
 * Splits the horizon at the distinct estimate times and pins every
 * control-linear component in every domain by the sign of its switching
 * function there. A free final (initial) time gets its outer bracket halfway
 * to the current value and its lower (upper) bound raised (lowered) to match.
 * Throws std::invalid_argument on an empty estimate list and RefinementAborted
 * when a domain shows both signs for one component.
 */
MultiDomainProblem build_multidomain(const BolzaProblem& problem, const std::vector<DiscontinuityEstimate>& estimates,
                                     const SwitchingProfile& profile, const CollocatedSolution& solution);

}  // namespace bbmesh
