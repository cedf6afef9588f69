#include "expander/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <string>

namespace expander {

ProfileSample make_sample(double t, double phi, double psi,
                          const LomseSpec& spec) {
  const double psi_t = rhs_phipsi({t, phi, psi}, spec)[1];
  const double r = std::exp(t);
  return {t, phi, psi, psi_t, r, r * phi, phi + psi, (psi_t + psi) / r};
}

bool ExpanderProfile::covers(double t) const noexcept {
  return forward.covers(t) || tail.covers(-t);
}

PhiPsiState ExpanderProfile::state_at(double t) const {
  if (forward.covers(t)) {
    const Vec2 z = forward.at(t);
    return {t, z[0], z[1]};
  }
  const Vec2 xy = tail.at(-t);
  return from_saddle_coords({-t, xy[0], xy[1]}, spec);
}

PerturbedSaddleSystem expander_saddle_system(const LomseSpec& spec) {
  const double kappa = spec.k() - 1.0;
  const double mu = spec.n() + spec.k();
  PerturbedSaddleSystem system;
  system.kappa = kappa;
  system.mu = mu;
  system.beta = 2.0;
  system.nonlinear = [spec, kappa, mu](double x, double y) {
    const Vec2 full = saddle_autonomous(x, y, spec);
    return Vec2{full[0] + kappa * x, full[1] - mu * y};
  };
  system.perturbation = [spec](double x, double y) {
    return saddle_forcing(x, y, spec);
  };
  return system;
}

namespace {

// Bisection resolves the stable ordinate to round-off, after which the
// unstable direction amplifies the error like exp(mu s) while X shrinks
// like exp(-kappa s). These horizons keep the amplified error below the
// cone width (classification) and near round-off on the kept tail, so the
// restarts between chained pieces do not show up in the residual.
double classify_horizon(const PerturbedSaddleSystem& system) {
  return 30.0 / (system.kappa + system.mu);
}
double keep_horizon(const PerturbedSaddleSystem& system) {
  return 10.0 / (system.kappa + system.mu);
}

ShootingConfig shooting_config(const SolverOptions& options,
                               const PerturbedSaddleSystem& system, double eps,
                               double T) {
  ShootingConfig cfg;
  cfg.M = options.M;
  cfg.eps = eps;
  cfg.T = T;
  cfg.t_max = T + classify_horizon(system);
  cfg.bracket_low = options.bracket_low;
  cfg.bracket_high = options.bracket_high;
  cfg.tolerances = options.shooting;
  return cfg;
}

struct MatchedEntry {
  double eps_hat;
  StableInitial stable;
  int iterations;
};

// Secant iteration on the entry abscissa so that phi(-T) = X + Y = eps.
MatchedEntry match_entry(const PerturbedSaddleSystem& system,
                         const SolverOptions& options, double eps, double T) {
  auto solve = [&](double eps_hat) {
    return find_stable_initial(system,
                               shooting_config(options, system, eps_hat, T));
  };
  auto mismatch = [&](double eps_hat, const StableInitial& st) {
    return eps_hat + st.y_star - eps;
  };

  double x0 = eps;
  StableInitial s0 = solve(x0);
  double g0 = mismatch(x0, s0);
  if (std::abs(g0) <= options.match_tol * eps) return {x0, std::move(s0), 1};

  double x1 = x0 - g0;
  for (int it = 2; it <= options.max_match_iterations; ++it) {
    StableInitial s1 = solve(x1);
    const double g1 = mismatch(x1, s1);
    if (std::abs(g1) <= options.match_tol * eps) return {x1, std::move(s1), it};
    const double next = (g1 != g0) ? x1 - g1 * (x1 - x0) / (g1 - g0) : x1 - g1;
    x0 = x1;
    g0 = g1;
    x1 = next;
    if (!(x1 > 0.0)) break;
  }
  throw Error(ErrorCode::NoConvergence,
              "entry abscissa matching phi(-T) = eps did not converge");
}

// Continues the stable solution toward the origin by re-shooting from the
// end of each trusted piece.
Trajectory build_tail(const PerturbedSaddleSystem& system,
                      const SolverOptions& options, const StableInitial& first,
                      double T, std::vector<double>& joins) {
  const double keep = keep_horizon(system);
  const double s_target = T + options.tail_decades * std::numbers::ln10;

  Trajectory tail = first.exit.path;
  if (tail.t_end() > T + keep) tail.truncate_at(T + keep);
  while (tail.t_end() < s_target) {
    const double s1 = tail.t_end();
    const double x1 = tail.back()[0];
    StableInitial next =
        find_stable_initial(system, shooting_config(options, system, x1, s1));
    Trajectory piece = std::move(next.exit.path);
    if (piece.t_end() > s1 + keep) piece.truncate_at(s1 + keep);
    tail.append(piece);
    joins.push_back(-s1);
  }
  if (tail.t_end() > s_target) tail.truncate_at(s_target);
  return tail;
}

Trajectory forward_leg(const LomseSpec& spec, const SolverOptions& options,
                       const PhiPsiState& start) {
  auto rhs = [&spec](double t, const Vec2& z) {
    return rhs_phipsi({t, z[0], z[1]}, spec);
  };
  auto jac = [&spec](double t, const Vec2& z) {
    const PhiPsiJacobian j = jacobian_phipsi({t, z[0], z[1]}, spec);
    return FieldJacobian{j.dstate, j.dt};
  };

  std::deque<std::pair<double, double>> history{{start.t, start.phi}};
  IntegrateOptions io;
  io.max_step = options.forward_max_step;
  io.stop = [&history, &options](double t, const Vec2& z) {
    history.emplace_back(t, z[0]);
    while (history.size() > 2 && history[1].first <= t - 1.0) {
      history.pop_front();
    }
    if (history.front().first > t - 1.0) return false;
    return std::abs(z[1]) < options.stop_psi &&
           std::abs(z[0] - history.front().second) < options.stop_phi;
  };
  Trajectory traj = integrate_stiff(rhs, jac, {start.phi, start.psi}, start.t,
                                    options.t_max, options.forward, {}, io);
  if (traj.termination != Termination::Stopped) {
    throw Error(ErrorCode::NoConvergence,
                traj.termination == Termination::StepFailure
                    ? "forward integration failed (step size underflow)"
                    : "forward solution did not settle before t_max");
  }
  return traj;
}

Trajectory constant_trajectory(double t0, double t1) {
  Trajectory traj(t0, {0.0, 0.0});
  traj.extend(t1, {0.0, 0.0}, {t0, t1 - t0, {0.0, 0.0}, {}});
  return traj;
}

void collect_samples(ExpanderProfile& profile) {
  const LomseSpec& spec = profile.spec;
  profile.samples.clear();
  const auto ts = profile.tail.times();
  const auto xs = profile.tail.states();
  for (std::size_t i = ts.size(); i-- > 1;) {
    const PhiPsiState st = from_saddle_coords({ts[i], xs[i][0], xs[i][1]}, spec);
    profile.samples.push_back(make_sample(st.t, st.phi, st.psi, spec));
  }
  const auto tf = profile.forward.times();
  const auto zf = profile.forward.states();
  for (std::size_t i = 0; i < tf.size(); ++i) {
    profile.samples.push_back(make_sample(tf[i], zf[i][0], zf[i][1], spec));
  }
}

ExpanderProfile flat_profile(const LomseSpec& spec, double T,
                             const SolverOptions& options) {
  ExpanderProfile profile{spec};
  profile.T = T;
  profile.R = std::exp(-T);
  profile.forward = constant_trajectory(-T, options.t_max);
  profile.tail =
      constant_trajectory(T, T + options.tail_decades * std::numbers::ln10);
  collect_samples(profile);
  profile.diagnostics.envelope_ok = true;
  profile.diagnostics.in_region_ok = true;
  return profile;
}

}  // namespace

ExpanderProfile build_expander(const LomseSpec& spec, double eps, double T,
                               const SolverOptions& options) {
  const InvariantRegion region = build_region(spec);
  if (eps == 0.0) return flat_profile(spec, T, options);
  if (!(eps > 0.0) || !(eps < spec.phi0())) {
    throw Error(ErrorCode::InvalidArgument,
                "Dirichlet slope must lie in (0, phi0)");
  }
  if (!(-T < options.t_max)) {
    throw Error(ErrorCode::InvalidArgument, "start time beyond t_max");
  }

  const PerturbedSaddleSystem system = expander_saddle_system(spec);
  MatchedEntry entry = match_entry(system, options, eps, T);

  ExpanderProfile profile{spec};
  profile.eps = eps;
  profile.T = T;
  profile.R = std::exp(-T);
  profile.eps_hat = entry.eps_hat;
  profile.y_star = entry.stable.y_star;
  profile.diagnostics.match_iterations = entry.iterations;
  profile.joins.push_back(-T);
  profile.tail = build_tail(system, options, entry.stable, T, profile.joins);
  profile.diagnostics.tail_segments = static_cast<int>(profile.joins.size());
  std::sort(profile.joins.begin(), profile.joins.end());

  const PhiPsiState start =
      from_saddle_coords({T, entry.eps_hat, entry.stable.y_star}, spec);
  profile.forward = forward_leg(spec, options, start);

  const auto tf = profile.forward.times();
  const auto zf = profile.forward.states();
  for (std::size_t i = 0; i < tf.size(); ++i) {
    const PhiPsiState st{tf[i], zf[i][0], zf[i][1]};
    if (!region.contains(st, options.region_slack)) {
      throw Error(ErrorCode::RegionViolation,
                  "forward solution left the invariant region at t = " +
                      std::to_string(tf[i]) + " (excess " +
                      std::to_string(region.excess(st)) + ")");
    }
  }

  collect_samples(profile);
  profile.phi_inf = profile.forward.back()[0];

  ProfileDiagnostics& diag = profile.diagnostics;
  diag.in_region_ok = std::all_of(
      profile.samples.begin(), profile.samples.end(), [&](const ProfileSample& s) {
        return region.contains({s.t, s.phi, s.psi}, options.region_slack);
      });
  diag.envelope_ok = check_envelope(profile);
  diag.max_residual = max_profile_residual(profile);
  const double s0 = profile.tail.t_begin();
  const double s1 = profile.tail.t_end();
  diag.decay_fit = fit_decay_rate(profile.tail, s0 + 0.2 * (s1 - s0), s1);
  diag.decay_bound = system.kappa - options.delta;
  diag.k_hat = small_r_exponent(profile);
  return profile;
}

ExpanderProfile dirichlet_solve(const LomseSpec& spec, double eps, double R,
                                const SolverOptions& options) {
  if (!(R > 0.0)) {
    throw Error(ErrorCode::DegenerateRadius, "Dirichlet radius must be positive");
  }
  return build_expander(spec, eps, -std::log(R), options);
}

UniquenessReport uniqueness_check(const LomseSpec& spec, double eps, double R,
                                  const UniquenessOptions& uniqueness,
                                  const SolverOptions& options) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "uniqueness needs eps in (0, 1]");
  }
  const double r_bound = uniqueness_radius_bound(spec);
  if (!(R > 0.0 && R <= r_bound * (1.0 + 1e-12))) {
    throw Error(ErrorCode::InvalidArgument,
                "uniqueness needs R in (0, " + std::to_string(r_bound) + "]");
  }

  auto configured = [&](std::uint64_t seed, bool halve) {
    SolverOptions opts = options;
    if (seed != 0) {
      std::mt19937_64 gen(seed);
      std::uniform_real_distribution<double> shrink(0.5, 1.0);
      opts.bracket_low = shrink(gen);
      opts.bracket_high = shrink(gen);
    }
    if (halve) {
      opts.shooting.rel *= 0.5;
      opts.shooting.abs *= 0.5;
      opts.forward.rel *= 0.5;
      opts.forward.abs *= 0.5;
    }
    return opts;
  };

  const ExpanderProfile first =
      dirichlet_solve(spec, eps, R, configured(uniqueness.seed_first, false));
  const ExpanderProfile second = dirichlet_solve(
      spec, eps, R,
      configured(uniqueness.seed_second, uniqueness.halve_second_tolerances));

  UniquenessReport report{0.0, 1e-6 * eps * R, 0, false};
  for (const ProfileSample& s : first.samples) {
    if (s.t > -first.T || !second.covers(s.t)) continue;
    // Both sides go through the dense output so identical runs agree exactly.
    const double mine = first.state_at(s.t).phi;
    const double other = second.state_at(s.t).phi;
    report.sup_difference =
        std::max(report.sup_difference, s.r * std::abs(mine - other));
    ++report.compared_points;
  }
  report.pass =
      report.compared_points > 0 && report.sup_difference < report.threshold;
  return report;
}

AsymptoticAngle asymptotic_angle(const ExpanderProfile& profile) {
  if (profile.eps == 0.0) return {0.0, 0.0};
  if (profile.forward.empty() || !(std::abs(profile.forward.back()[1]) < 1e-8)) {
    throw Error(ErrorCode::NoConvergence, "profile has not settled");
  }
  const double t_end = profile.forward.t_end();
  return {profile.forward.back()[0],
          0.5 * envelope_constant(profile.spec) * std::exp(-2.0 * t_end)};
}

double envelope_constant(const LomseSpec& spec) noexcept {
  const double phi0 = spec.phi0();
  return 2.0 * spec.lambda_sq() * (spec.n() - spec.p()) * phi0 * phi0 * phi0 /
         (3.0 * std::sqrt(3.0));
}

bool check_envelope(const ExpanderProfile& profile) {
  const double c = envelope_constant(profile.spec);
  bool last_small = false;
  for (const ProfileSample& s : profile.samples) {
    if (s.t < -profile.T) continue;
    if (s.psi_t > 0.0 && !(s.psi < c * std::exp(-2.0 * s.t))) return false;
    last_small = std::abs(s.psi) < 1e-8;
  }
  return last_small;
}

double small_r_exponent(const ExpanderProfile& profile) {
  double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_xy = 0.0;
  double log_min = 0.0, log_max = 0.0;
  int count = 0;
  for (const ProfileSample& s : profile.samples) {
    if (s.r > profile.R * (1.0 + 1e-12) || !(s.f > 0.0)) continue;
    const double x = std::log(s.r);
    const double y = std::log(s.f);
    if (count == 0) log_min = log_max = x;
    log_min = std::min(log_min, x);
    log_max = std::max(log_max, x);
    sum_x += x;
    sum_y += y;
    sum_xx += x * x;
    sum_xy += x * y;
    ++count;
  }
  if (count < 3 || (log_max - log_min) < 3.0 * std::numbers::ln10) {
    throw Error(ErrorCode::WindowTooShort,
                "small-r fit needs samples spanning at least 3 decades of r");
  }
  const double n = count;
  return (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
}

namespace {

// d(phi + psi)/dt by central differences of the dense output.
double slope_rate(const ExpanderProfile& profile, double t, double h) {
  const PhiPsiState a = profile.state_at(t + h);
  const PhiPsiState b = profile.state_at(t - h);
  return ((a.phi + a.psi) - (b.phi + b.psi)) / (2.0 * h);
}

double relative_residual(const ExpanderProfile& profile, double t, double h) {
  const PhiPsiState st = profile.state_at(t);
  const double r = std::exp(t);
  const double f = r * st.phi;
  const double f_r = st.phi + st.psi;
  const double f_rr = slope_rate(profile, t, h) / r;
  const auto terms = ode_terms(r, f, f_r, f_rr, profile.spec,
                               SimilarityConstant::Expander);
  const double scale = std::abs(terms[0]) + std::abs(terms[1]) +
                       std::abs(terms[2]) + std::abs(terms[3]);
  if (scale == 0.0) return 0.0;
  return std::abs(terms[0] + terms[1] + terms[2] + terms[3]) / scale;
}

}  // namespace

double max_profile_residual(const ExpanderProfile& profile) {
  if (profile.eps == 0.0) return 0.0;
  double worst = 0.0;
  auto probe = [&](double t, double span) {
    const double h = std::min(1e-5, 0.25 * span);
    if (!profile.covers(t - h) || !profile.covers(t + h)) return;
    for (double join : profile.joins) {
      if (t - h <= join && join <= t + h) return;
    }
    worst = std::max(worst, relative_residual(profile, t, h));
  };
  for (std::size_t i = 0; i + 1 < profile.samples.size(); ++i) {
    const double t0 = profile.samples[i].t;
    const double t1 = profile.samples[i + 1].t;
    const double span = t1 - t0;
    if (!(span > 0.0)) continue;
    probe(t0, span);
    probe(0.5 * (t0 + t1), span);
  }
  return worst;
}

RadiusScan scan_radius(const LomseSpec& spec, double eps,
                       std::span<const double> radii,
                       const SolverOptions& options) {
  RadiusScan scan;
  bool failed = false;
  for (double R : radii) {
    RadiusScanRow row{R, true, {}};
    try {
      dirichlet_solve(spec, eps, R, options);
    } catch (const Error& e) {
      row.ok = false;
      row.error = std::string(error_name(e.code()));
    }
    if (!failed) {
      if (row.ok) {
        scan.r0_estimate = R;
      } else {
        failed = true;
      }
    }
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

}  // namespace expander
