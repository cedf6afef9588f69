#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expander/barrier.hpp"
#include "expander/dynamics.hpp"
#include "expander/integrator.hpp"
#include "expander/params.hpp"
#include "expander/stable_curve.hpp"

namespace expander {

struct SolverOptions {
  /// Cone aperture and decay slack of the stable-curve engine.
  double M = 0.1;
  double delta = 0.5;
  Tolerances shooting{1e-12, 1e-16};
  Tolerances forward{1e-11, 1e-18};
  /// Step cap on the forward leg, keeps its Hermite dense output accurate.
  double forward_max_step = 0.01;
  /// Relative tolerance on phi(-T) = eps.
  double match_tol = 1e-12;
  int max_match_iterations = 40;
  /// Forward leg stops once |psi| < stop_psi and phi moved less than
  /// stop_phi over the last unit of time; gives up at t_max.
  double stop_psi = 1e-9;
  double stop_phi = 1e-9;
  double t_max = 20.0;
  /// Length of the small-r tail, in decades of r below R.
  double tail_decades = 4.0;
  /// Entry-edge bracket is [-low M eps, +high M eps].
  double bracket_low = 1.0;
  double bracket_high = 1.0;
  double region_slack = 1e-9;
};

/// One point of a computed profile; r = e^t, f = r phi, f_r = phi + psi and
/// f_rr = e^-t (psi_t + psi).
struct ProfileSample {
  double t;
  double phi;
  double psi;
  double psi_t;
  double r;
  double f;
  double f_r;
  double f_rr;
};

ProfileSample make_sample(double t, double phi, double psi,
                          const LomseSpec& spec);

struct ProfileDiagnostics {
  /// sup of |ode residual| / (sum of |terms|), f_rr by differentiating the
  /// dense output.
  double max_residual = 0.0;
  /// Fitted decay rate of X on the small-r tail and its guaranteed bound.
  double decay_fit = 0.0;
  double decay_bound = 0.0;
  double k_hat = 0.0;
  bool envelope_ok = false;
  bool in_region_ok = false;
  int match_iterations = 0;
  int tail_segments = 0;
};

struct ExpanderProfile {
  LomseSpec spec;
  double eps = 0.0;
  double R = 0.0;
  double T = 0.0;
  /// Entry abscissa X(T) and stable ordinate Y(T) that realize phi(-T) = eps.
  double eps_hat = 0.0;
  double y_star = 0.0;
  /// (phi, psi) against t, from t = -T forward.
  Trajectory forward;
  /// (X, Y) against s = -t, from s = T toward the origin.
  Trajectory tail;
  /// Times where independently computed pieces meet (t = -T and the
  /// restarts of the chained tail). The dense output is only continuous
  /// there, so difference stencils must not straddle them.
  std::vector<double> joins;
  /// Tail and forward samples merged, ascending in t.
  std::vector<ProfileSample> samples;
  double phi_inf = 0.0;
  ProfileDiagnostics diagnostics;

  /// Dense (phi, psi) at any t covered by the tail or the forward leg.
  PhiPsiState state_at(double t) const;
  bool covers(double t) const noexcept;
};

/// The expander system in diagonal saddle coordinates, reversed time:
/// kappa = k - 1, mu = n + k, beta = 2.
PerturbedSaddleSystem expander_saddle_system(const LomseSpec& spec);

/// Solution with phi(-T) = eps that tends to the origin as t -> -infinity,
/// continued forward through the invariant region until it settles.
/// eps = 0 yields the flat solution. Throws Error{UnsupportedCase},
/// {BracketFailure}, {RegionViolation} or {NoConvergence}.
ExpanderProfile build_expander(const LomseSpec& spec, double eps, double T,
                               const SolverOptions& options = {});

/// build_expander with T = -log R, i.e. f(R) = eps R.
ExpanderProfile dirichlet_solve(const LomseSpec& spec, double eps, double R,
                                const SolverOptions& options = {});

struct UniquenessOptions {
  /// Seed 0 keeps the full bracket; any other seed shrinks both bracket
  /// ends by independent factors in [0.5, 1).
  std::uint64_t seed_first = 1;
  std::uint64_t seed_second = 2;
  bool halve_second_tolerances = true;
};

struct UniquenessReport {
  double sup_difference;
  double threshold;
  int compared_points;
  bool pass;
};

/// Solves the Dirichlet problem twice with independent brackets and compares
/// f on [0, R]. Requires eps in (0, 1] and R in (0, lambda^(-2/(2k-3))].
UniquenessReport uniqueness_check(const LomseSpec& spec, double eps, double R,
                                  const UniquenessOptions& uniqueness = {},
                                  const SolverOptions& options = {});

struct AsymptoticAngle {
  double phi_inf;
  /// Bound on the remaining growth of phi, integral of C e^-2t past the end.
  double error_estimate;
};

/// Throws Error{NoConvergence} if the profile has not settled.
AsymptoticAngle asymptotic_angle(const ExpanderProfile& profile);

/// 2 l^2 (n - p) phi0^3 / (3 sqrt 3).
double envelope_constant(const LomseSpec& spec) noexcept;

/// psi_t > 0 implies psi < C e^-2t at every forward sample, and the final
/// psi is below 1e-8.
bool check_envelope(const ExpanderProfile& profile);

/// Least-squares slope of log f against log r over the samples with r <= R.
/// Throws Error{WindowTooShort} when they span fewer than 3 decades.
double small_r_exponent(const ExpanderProfile& profile);

/// Relative ODE residual along the profile with f_rr obtained by central
/// differences of the dense output, at samples and step midpoints.
double max_profile_residual(const ExpanderProfile& profile);

struct RadiusScanRow {
  double R;
  bool ok;
  std::string error;
};

struct RadiusScan {
  std::vector<RadiusScanRow> rows;
  /// Largest R before the first failure; empty if the first radius fails.
  std::optional<double> r0_estimate;
};

/// Runs dirichlet_solve over increasing radii and reports the first failure.
RadiusScan scan_radius(const LomseSpec& spec, double eps,
                       std::span<const double> radii,
                       const SolverOptions& options = {});

}  // namespace expander
