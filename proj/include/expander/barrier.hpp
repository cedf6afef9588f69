#pragma once

#include "expander/dynamics.hpp"
#include "expander/params.hpp"

namespace expander {

/// Compact region bounded by {psi = 0} and the graph psi = g(phi) over
/// [0, phi0]. Forward trajectories of the expander system never leave it.
///
/// g(phi) = c ((l^2 - 1) p / (1 + l^2 phi^2) - (n - p)) phi / (n - p)
///
/// with c = 3/2 for the three low-dimensional cases and c = 2 for n >= 7.
class InvariantRegion {
 public:
  const LomseSpec& spec() const noexcept { return spec_; }
  double coefficient() const noexcept { return coefficient_; }

  double barrier(double phi) const noexcept;
  double barrier_slope(double phi) const noexcept;

  /// 0 <= phi <= phi0 and 0 <= psi <= g(phi), each side relaxed by `slack`.
  bool contains(const PhiPsiState& state, double slack = 1e-9) const noexcept;

  /// Largest amount by which the state lies outside the region (0 inside).
  double excess(const PhiPsiState& state) const noexcept;

 private:
  friend InvariantRegion build_region(const LomseSpec& spec);
  InvariantRegion(const LomseSpec& spec, double coefficient)
      : spec_(spec), coefficient_(coefficient) {}

  LomseSpec spec_;
  double coefficient_;
};

/// Throws Error{UnsupportedCase} unless solvable_case(spec).
InvariantRegion build_region(const LomseSpec& spec);

struct InvarianceReport {
  /// min over phi in [0, phi0] of psi_t on the bottom edge.
  double min_bottom_inflow;
  /// min over the barrier graph and all sampled times of <(phi_t, psi_t), (g', -1)>.
  double min_barrier_inflow;
  double phi_at_min_barrier;
  int samples;
  bool pass;
};

/// Samples both boundary arcs at n_samples points, for t in
/// {t_from, ..., t_from + 20} and for the autonomous limit. Passes when both
/// minimal inflows are >= -1e-10. Requires n_samples >= 100.
InvarianceReport verify_invariance(const InvariantRegion& region, double t_from,
                                   int n_samples);

}  // namespace expander
