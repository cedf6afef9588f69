#pragma once

#include <functional>
#include <vector>

#include "expander/integrator.hpp"

namespace expander {

/// Planar system
///   X_s = -kappa X + f1(X, Y) + exp(-beta s) g1(X, Y)
///   Y_s =     mu Y + f2(X, Y) + exp(-beta s) g2(X, Y)
/// with f superlinear and g at most linear at the origin, which is then a
/// saddle of the frozen-time system.
struct PerturbedSaddleSystem {
  using PlanarMap = std::function<Vec2(double x, double y)>;

  double kappa;
  double mu;
  double beta;
  PlanarMap nonlinear;     // (f1, f2)
  PlanarMap perturbation;  // (g1, g2)

  /// Field with the perturbation scaled by `weight` in place of exp(-beta s).
  Vec2 weighted_field(double weight, double x, double y) const;
  Vec2 field(double s, double x, double y) const;
};

/// kappa/mu saddle with f = g = 0.
PerturbedSaddleSystem linear_saddle(double kappa, double mu, double beta = 1.0);

/// Shooting along the entry edge {X = eps, |Y| <= M eps} of the cone
/// R = {0 <= X <= eps, |Y| <= M X} at time T.
struct ShootingConfig {
  double M = 0.1;
  double eps = 0.05;
  double T = 0.0;
  double t_max = 20.0;
  /// Zero selects 1e-8 * eps.
  double convergence_radius = 0.0;
  /// Zero selects 1e-15 * M * eps, i.e. bisection to round-off.
  double bisect_tol = 0.0;
  /// The bracket is [-low * M eps, +high * M eps].
  double bracket_low = 1.0;
  double bracket_high = 1.0;
  Tolerances tolerances{1e-12, 1e-16};
};

enum class ExitClass { Top, Bottom, Converged, Undecided };

std::string_view exit_name(ExitClass cls) noexcept;

struct ExitReport {
  ExitClass cls;
  Trajectory path;
};

/// Integrates from (eps, y0) at s = T and reports how the solution leaves
/// the cone. Converged means the norm dropped below the convergence radius,
/// or the horizon was reached inside the cone with the norm still
/// decreasing; Undecided otherwise.
ExitReport classify_exit(const PerturbedSaddleSystem& system,
                         const ShootingConfig& config, double y0);

struct BisectionStep {
  double low;
  double high;
  ExitClass low_class;
  ExitClass high_class;
};

struct StableInitial {
  double y_star;
  ExitReport exit;
  std::vector<BisectionStep> trace;
};

/// Bisection on Y(T) between a Bottom and a Top witness. Throws
/// Error{BracketFailure} if the bracket ends do not exit through opposite
/// edges, Error{Undecided} if a probe cannot be classified.
StableInitial find_stable_initial(const PerturbedSaddleSystem& system,
                                  const ShootingConfig& config);

/// -slope of the least-squares line through log X(s) on [s_a, s_b], sampled
/// from the dense output. Throws Error{WindowTooShort}.
double fit_decay_rate(const Trajectory& trajectory, double s_a, double s_b);

struct AdmissibleEntry {
  double eps0;
  int T0;
};

struct EntrySearch {
  int max_halvings = 30;
  int max_start_time = 20;
  int samples = 1000;
};

/// Smallest T in {0, 1, ...} and, for it, largest eps in {2^-j} such that
/// the sampled field satisfies X_s <= -(kappa - delta) X on the cone and
/// Y_s > 0 / Y_s < 0 on its upper / lower edge for every s >= T. The field
/// is affine in exp(-beta s), so checking s = T and s = infinity suffices.
/// Throws Error{NoAdmissiblePair}.
AdmissibleEntry admissible_entry(const PerturbedSaddleSystem& system, double M,
                                 double delta, const EntrySearch& search = {});

}  // namespace expander
