#include "expander/stable_curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace expander {

Vec2 PerturbedSaddleSystem::weighted_field(double weight, double x,
                                           double y) const {
  const Vec2 f = nonlinear(x, y);
  const Vec2 g = perturbation(x, y);
  return {-kappa * x + f[0] + weight * g[0], mu * y + f[1] + weight * g[1]};
}

Vec2 PerturbedSaddleSystem::field(double s, double x, double y) const {
  return weighted_field(std::exp(-beta * s), x, y);
}

PerturbedSaddleSystem linear_saddle(double kappa, double mu, double beta) {
  auto zero = [](double, double) { return Vec2{0.0, 0.0}; };
  return {kappa, mu, beta, zero, zero};
}

std::string_view exit_name(ExitClass cls) noexcept {
  switch (cls) {
    case ExitClass::Top: return "top";
    case ExitClass::Bottom: return "bottom";
    case ExitClass::Converged: return "converged";
    case ExitClass::Undecided: return "undecided";
  }
  return "unknown";
}

namespace {

double effective_radius(const ShootingConfig& config) {
  return config.convergence_radius > 0.0 ? config.convergence_radius
                                         : 1e-8 * config.eps;
}

double effective_bisect_tol(const ShootingConfig& config) {
  return config.bisect_tol > 0.0 ? config.bisect_tol
                                 : 1e-15 * config.M * config.eps;
}

void check_config(const ShootingConfig& config) {
  if (!(config.M > 0.0) || !(config.eps > 0.0) || !(config.t_max > config.T)) {
    throw Error(ErrorCode::InvalidArgument,
                "shooting config needs M > 0, eps > 0 and t_max > T");
  }
}

}  // namespace

ExitReport classify_exit(const PerturbedSaddleSystem& system,
                         const ShootingConfig& config, double y0) {
  check_config(config);
  const double M = config.M;
  if (std::abs(y0) > M * config.eps * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "initial Y outside the entry edge");
  }
  const double radius = effective_radius(config);

  const Event events[] = {
      {"top", [M](double, const Vec2& z) { return z[1] - M * z[0]; }, +1},
      {"bottom", [M](double, const Vec2& z) { return z[1] + M * z[0]; }, -1},
      {"converged",
       [radius](double, const Vec2& z) {
         return z[0] * z[0] + z[1] * z[1] - radius * radius;
       },
       -1},
  };
  auto rhs = [&system](double s, const Vec2& z) {
    return system.field(s, z[0], z[1]);
  };
  Tolerances tol = config.tolerances;
  tol.abs = std::min(tol.abs, 1e-4 * config.tolerances.rel * config.eps);

  ExitReport report{ExitClass::Undecided,
                    integrate(rhs, {config.eps, y0}, config.T, config.t_max, tol,
                              events)};
  const Trajectory& path = report.path;
  if (path.termination == Termination::Event) {
    if (path.event_name == "top") report.cls = ExitClass::Top;
    if (path.event_name == "bottom") report.cls = ExitClass::Bottom;
    if (path.event_name == "converged") report.cls = ExitClass::Converged;
    return report;
  }
  if (path.termination != Termination::ReachedEnd) return report;

  // Horizon reached inside the cone: converged only if still contracting.
  const double back = std::max(config.T, config.t_max - 1.0);
  const Vec2 z_end = path.back();
  const Vec2 z_back = path.at(back);
  const double norm_end = std::hypot(z_end[0], z_end[1]);
  const double norm_back = std::hypot(z_back[0], z_back[1]);
  if (norm_end < norm_back) report.cls = ExitClass::Converged;
  return report;
}

StableInitial find_stable_initial(const PerturbedSaddleSystem& system,
                                  const ShootingConfig& config) {
  check_config(config);
  const double edge = config.M * config.eps;
  double low = -config.bracket_low * edge;
  double high = config.bracket_high * edge;
  ExitReport low_exit = classify_exit(system, config, low);
  ExitReport high_exit = classify_exit(system, config, high);
  if (low_exit.cls != ExitClass::Bottom || high_exit.cls != ExitClass::Top) {
    throw Error(ErrorCode::BracketFailure,
                "entry edge is not bracketing: lower end exits " +
                    std::string(exit_name(low_exit.cls)) + ", upper end exits " +
                    std::string(exit_name(high_exit.cls)) +
                    "; shrink eps or increase T");
  }

  StableInitial out{0.0, {ExitClass::Undecided, {}}, {}};
  out.trace.push_back({low, high, low_exit.cls, high_exit.cls});
  const double tol = effective_bisect_tol(config);

  while (high - low > tol) {
    const double mid = 0.5 * (low + high);
    if (mid == low || mid == high) break;
    ExitReport probe = classify_exit(system, config, mid);
    switch (probe.cls) {
      case ExitClass::Top:
        high = mid;
        break;
      case ExitClass::Bottom:
        low = mid;
        break;
      case ExitClass::Converged:
        out.y_star = mid;
        out.exit = std::move(probe);
        return out;
      case ExitClass::Undecided:
        throw Error(ErrorCode::Undecided,
                    "probe at Y = " + std::to_string(mid) +
                        " neither exits nor contracts before t_max");
    }
    out.trace.push_back({low, high, ExitClass::Bottom, ExitClass::Top});
  }

  out.y_star = 0.5 * (low + high);
  out.exit = classify_exit(system, config, out.y_star);
  if (out.exit.cls != ExitClass::Converged) {
    throw Error(ErrorCode::Undecided,
                "bisection reached its resolution but the midpoint exits " +
                    std::string(exit_name(out.exit.cls)) +
                    " before t_max; shorten the horizon");
  }
  return out;
}

double fit_decay_rate(const Trajectory& trajectory, double s_a, double s_b) {
  if (!(s_b > s_a) || !trajectory.covers(s_a) || !trajectory.covers(s_b)) {
    throw Error(ErrorCode::WindowTooShort,
                "decay window must be a nonempty part of the trajectory");
  }
  constexpr int kPoints = 101;
  double sum_s = 0.0, sum_y = 0.0, sum_ss = 0.0, sum_sy = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double s = i + 1 == kPoints ? s_b : s_a + (s_b - s_a) * i / (kPoints - 1);
    const double x = trajectory.at(s)[0];
    if (!(x > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "X must stay positive on the window");
    }
    const double y = std::log(x);
    sum_s += s;
    sum_y += y;
    sum_ss += s * s;
    sum_sy += s * y;
  }
  const double n = kPoints;
  const double slope = (n * sum_sy - sum_s * sum_y) / (n * sum_ss - sum_s * sum_s);
  return -slope;
}

namespace {

bool entry_certified(const PerturbedSaddleSystem& system, double M, double delta,
                     double eps, double weight, int samples) {
  const double rate = system.kappa - delta;
  const double x_edge = std::min(eps, eps / M);

  // Cone interior and boundary: X_s <= -(kappa - delta) X.
  const int cols = std::max(2, static_cast<int>(std::sqrt(samples)));
  for (int i = 1; i <= cols; ++i) {
    const double x = eps * i / cols;
    const double y_cap = std::min(M * x, eps);
    for (int j = 0; j < cols; ++j) {
      const double y = -y_cap + 2.0 * y_cap * j / (cols - 1);
      if (system.weighted_field(weight, x, y)[0] > -rate * x) return false;
    }
  }
  // Upper edge pushes out upwards, lower edge downwards.
  for (int i = 1; i <= samples; ++i) {
    const double x = x_edge * i / samples;
    if (!(system.weighted_field(weight, x, M * x)[1] > 0.0)) return false;
    if (!(system.weighted_field(weight, x, -M * x)[1] < 0.0)) return false;
  }
  return true;
}

}  // namespace

AdmissibleEntry admissible_entry(const PerturbedSaddleSystem& system, double M,
                                 double delta, const EntrySearch& search) {
  if (!(delta > 0.0 && delta < system.kappa) || !(M > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need M > 0 and 0 < delta < kappa");
  }
  for (int T = 0; T <= search.max_start_time; ++T) {
    const double weight = std::exp(-system.beta * T);
    for (int j = 0; j <= search.max_halvings; ++j) {
      const double eps = std::ldexp(1.0, -j);
      if (entry_certified(system, M, delta, eps, weight, search.samples) &&
          entry_certified(system, M, delta, eps, 0.0, search.samples)) {
        return {eps, T};
      }
    }
  }
  throw Error(ErrorCode::NoAdmissiblePair,
              "no (eps, T) pair certified within the search bounds");
}

}  // namespace expander
