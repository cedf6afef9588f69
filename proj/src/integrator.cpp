#include "expander/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

namespace expander {

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(double t0, const Vec2& x0) {
  times_.push_back(t0);
  states_.push_back(x0);
}

Vec2 Trajectory::Segment::value(double theta) const noexcept {
  Vec2 x{};
  for (int i = 0; i < 2; ++i) {
    double acc = 0.0;
    for (int m = 4; m >= 0; --m) acc = (acc + c[m][i]) * theta;
    x[i] = y0[i] + acc;
  }
  return x;
}

Vec2 Trajectory::Segment::slope(double theta) const noexcept {
  Vec2 dx{};
  for (int i = 0; i < 2; ++i) {
    double acc = 0.0;
    for (int m = 4; m >= 0; --m) acc = acc * theta + (m + 1) * c[m][i];
    dx[i] = acc;
  }
  return dx;
}

void Trajectory::extend(double t, const Vec2& x, const Segment& segment) {
  times_.push_back(t);
  states_.push_back(x);
  segments_.push_back(segment);
}

void Trajectory::append(const Trajectory& next) {
  if (next.empty()) return;
  if (empty()) {
    *this = next;
    return;
  }
  if (next.t_begin() != t_end()) {
    throw Error(ErrorCode::InvalidArgument,
                "appended trajectory must start where this one ends");
  }
  times_.insert(times_.end(), next.times_.begin() + 1, next.times_.end());
  states_.insert(states_.end(), next.states_.begin() + 1, next.states_.end());
  segments_.insert(segments_.end(), next.segments_.begin(),
                   next.segments_.end());
  termination = next.termination;
  event_name = next.event_name;
  rejected_steps += next.rejected_steps;
  rhs_evaluations += next.rhs_evaluations;
}

void Trajectory::truncate_last(double t, const Vec2& x) {
  times_.back() = t;
  states_.back() = x;
}

void Trajectory::truncate_at(double t) {
  if (!covers(t)) {
    throw Error(ErrorCode::InvalidArgument, "truncation time outside trajectory");
  }
  const std::size_t i = locate(t);
  const Vec2 x = at(t);
  times_.resize(i + 2);
  states_.resize(i + 2);
  segments_.resize(i + 1);
  if (t == times_[i]) {
    times_.pop_back();
    states_.pop_back();
    segments_.pop_back();
    return;
  }
  times_.back() = t;
  states_.back() = x;
}

int Trajectory::direction() const noexcept {
  if (times_.size() < 2) return 0;
  return times_.back() > times_.front() ? 1 : -1;
}

bool Trajectory::covers(double t) const noexcept {
  if (times_.empty()) return false;
  const double lo = std::min(times_.front(), times_.back());
  const double hi = std::max(times_.front(), times_.back());
  return t >= lo && t <= hi;
}

std::size_t Trajectory::locate(double t) const {
  // Index i of the segment with t between times_[i] and times_[i+1].
  const int dir = direction();
  auto it = std::upper_bound(
      times_.begin(), times_.end(), t,
      [dir](double value, double sample) { return dir * value < dir * sample; });
  std::size_t i = static_cast<std::size_t>(it - times_.begin());
  i = (i == 0) ? 0 : i - 1;
  return std::min(i, segments_.size() - 1);
}

Vec2 Trajectory::at(double t) const {
  if (!covers(t)) {
    throw Error(ErrorCode::InvalidArgument,
                "dense output requested outside the trajectory");
  }
  if (segments_.empty()) return states_.front();
  const Segment& seg = segments_[locate(t)];
  return seg.value((t - seg.t0) / seg.h);
}

Vec2 Trajectory::derivative_at(double t) const {
  if (!covers(t)) {
    throw Error(ErrorCode::InvalidArgument,
                "dense output requested outside the trajectory");
  }
  if (segments_.empty()) return {0.0, 0.0};
  const Segment& seg = segments_[locate(t)];
  const Vec2 dx = seg.slope((t - seg.t0) / seg.h);
  return {dx[0] / seg.h, dx[1] / seg.h};
}

namespace {

Vec2 eval_segment(const Trajectory::Segment& seg, double t) {
  return seg.value((t - seg.t0) / seg.h);
}

// ---------------------------------------------------------------------------
// Event location shared by both steppers.

struct EventHit {
  std::size_t index;
  double t;
  Vec2 x;
};

class EventTracker {
 public:
  EventTracker(std::span<const Event> events, double t0, const Vec2& x0)
      : events_(events) {
    previous_.reserve(events.size());
    for (const auto& ev : events_) previous_.push_back(ev.fn(t0, x0));
  }

  std::optional<EventHit> check(const Trajectory::Segment& seg, double t_prev,
                                double t_new, const Vec2& x_new) {
    std::optional<EventHit> best;
    const int dir = t_new > t_prev ? 1 : -1;
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const double g_prev = previous_[i];
      const double g_new = events_[i].fn(t_new, x_new);
      previous_[i] = g_new;
      // A crossing leaves the closed side: <= 0 then > 0 (rising), or
      // >= 0 then < 0 (falling).
      const bool rising = g_prev <= 0.0 && g_new > 0.0;
      const bool falling = g_prev >= 0.0 && g_new < 0.0;
      const int want = events_[i].direction;
      int sense = 0;
      if (want >= 0 && rising) sense = 1;
      if (want <= 0 && falling) sense = -1;
      if (sense == 0) continue;
      const double te = locate_root(events_[i], seg, t_prev, t_new, sense);
      if (!best || dir * te < dir * best->t) {
        best = EventHit{i, te, eval_segment(seg, te)};
      }
    }
    return best;
  }

  const std::string& name(std::size_t index) const { return events_[index].name; }

 private:
  // Bisection on the dense output; b always lies past the crossing.
  static double locate_root(const Event& ev, const Trajectory::Segment& seg,
                            double a, double b, int sense) {
    for (int iter = 0; iter < 200 && std::abs(b - a) > 1e-12; ++iter) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      const double g_mid = ev.fn(mid, eval_segment(seg, mid));
      const bool crossed = sense > 0 ? g_mid > 0.0 : g_mid < 0.0;
      (crossed ? b : a) = mid;
    }
    return b;
  }

  std::span<const Event> events_;
  std::vector<double> previous_;
};

// Applies the bookkeeping common to both steppers after an accepted step.
// Returns true if integration must stop.
bool accept_step(Trajectory& traj, EventTracker& tracker,
                 const IntegrateOptions& options,
                 const Trajectory::Segment& seg, double t_prev, double t_new,
                 const Vec2& x_new) {
  traj.extend(t_new, x_new, seg);
  if (auto hit = tracker.check(seg, t_prev, t_new, x_new)) {
    traj.truncate_last(hit->t, hit->x);
    traj.termination = Termination::Event;
    traj.event_name = tracker.name(hit->index);
    return true;
  }
  if (options.stop && options.stop(t_new, x_new)) {
    traj.termination = Termination::Stopped;
    return true;
  }
  return false;
}

double initial_step_size(const IntegrateOptions& options, double t0, double t1) {
  double h = options.initial_step > 0.0 ? options.initial_step
                                        : 1e-4 * std::abs(t1 - t0);
  return std::min(h, options.max_step);
}

bool step_underflow(double t, double h) {
  return std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(t), 1.0);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace dp {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;

constexpr std::array<double, 7> b = {35.0 / 384.0,     0.0,           500.0 / 1113.0,
                                     125.0 / 192.0,    -2187.0 / 6784.0,
                                     11.0 / 84.0,      0.0};
constexpr std::array<double, 7> e = {-71.0 / 57600.0, 0.0,          71.0 / 16695.0,
                                     -71.0 / 1920.0,  17253.0 / 339200.0,
                                     -22.0 / 525.0,   1.0 / 40.0};

// Quartic continuous extension (Shampine's optimal c6 choice).
constexpr double dense[7][4] = {
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0},
    {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0},
    {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0},
    {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0},
    {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0}};

constexpr double safety = 0.9;
constexpr double fac_min = 0.2;
constexpr double fac_max = 10.0;
constexpr double alpha = 0.7 / 5.0;
constexpr double beta = 0.4 / 5.0;

}  // namespace dp

Vec2 combine(const Vec2& y, double h, std::initializer_list<std::pair<double, const Vec2*>> terms) {
  Vec2 out = y;
  for (const auto& [w, k] : terms) {
    out[0] += h * w * (*k)[0];
    out[1] += h * w * (*k)[1];
  }
  return out;
}

}  // namespace

Trajectory integrate(const Field& rhs, const Vec2& x0, double t0, double t1,
                     const Tolerances& tol, std::span<const Event> events,
                     const IntegrateOptions& options) {
  if (t0 == t1) {
    throw Error(ErrorCode::InvalidArgument, "integration interval is empty");
  }
  if (!(tol.rel > 0.0) || !(tol.abs > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  const int dir = t1 > t0 ? 1 : -1;
  Trajectory traj(t0, x0);
  EventTracker tracker(events, t0, x0);

  double t = t0;
  Vec2 y = x0;
  Vec2 k1 = rhs(t, y);
  traj.rhs_evaluations = 1;
  double h = dir * initial_step_size(options, t0, t1);
  double err_prev = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > options.max_steps || step_underflow(t, h)) {
      traj.termination = Termination::StepFailure;
      return traj;
    }
    bool final_step = false;
    if (dir * (t + h - t1) >= 0.0) {
      h = t1 - t;
      final_step = true;
    }

    using namespace dp;
    const Vec2 k2 = rhs(t + c2 * h, combine(y, h, {{a21, &k1}}));
    const Vec2 k3 = rhs(t + c3 * h, combine(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec2 k4 =
        rhs(t + c4 * h, combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec2 k5 = rhs(t + c5 * h, combine(y, h, {{a51, &k1}, {a52, &k2},
                                                   {a53, &k3}, {a54, &k4}}));
    const Vec2 k6 = rhs(t + h, combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                             {a64, &k4}, {a65, &k5}}));
    const Vec2 y_new = combine(y, h, {{b[0], &k1}, {b[2], &k3}, {b[3], &k4},
                                      {b[4], &k5}, {b[5], &k6}});
    const double t_new = final_step ? t1 : t + h;
    const Vec2 k7 = rhs(t_new, y_new);
    traj.rhs_evaluations += 6;

    const std::array<const Vec2*, 7> ks = {&k1, &k2, &k3, &k4, &k5, &k6, &k7};
    double err_sq = 0.0;
    for (int i = 0; i < 2; ++i) {
      double est = 0.0;
      for (int j = 0; j < 7; ++j) est += e[j] * (*ks[j])[i];
      est *= h;
      const double scale =
          tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_sq += (est / scale) * (est / scale);
    }
    const double err = std::sqrt(0.5 * err_sq);

    if (!std::isfinite(err)) {
      h *= fac_min;
      last_rejected = true;
      ++traj.rejected_steps;
      continue;
    }

    if (err <= 1.0) {
      Trajectory::Segment seg{t, h, y, {}};
      for (int m = 0; m < 4; ++m) {
        for (int i = 0; i < 2; ++i) {
          double acc = 0.0;
          for (int j = 0; j < 7; ++j) acc += (*ks[j])[i] * dense[j][m];
          seg.c[m][i] = h * acc;
        }
      }
      const double t_prev = t;
      t = t_new;
      y = y_new;
      k1 = k7;
      if (accept_step(traj, tracker, options, seg, t_prev, t, y)) return traj;

      double factor = err == 0.0 ? fac_max
                                 : safety * std::pow(err, -alpha) *
                                       std::pow(err_prev, beta);
      factor = std::clamp(factor, fac_min, last_rejected ? 1.0 : fac_max);
      err_prev = std::max(err, 1e-4);
      last_rejected = false;
      h = dir * std::min(std::abs(h) * factor, options.max_step);
    } else {
      const double factor =
          std::max(fac_min, safety * std::pow(err, -alpha));
      h *= factor;
      last_rejected = true;
      ++traj.rejected_steps;
    }
  }
  traj.termination = Termination::ReachedEnd;
  return traj;
}

// ---------------------------------------------------------------------------
// Implicit Bulirsch-Stoer (GSL bsimp) with Hermite dense output.

namespace {

Trajectory::Segment hermite_segment(double t0, double h, const Vec2& y0,
                                    const Vec2& f0, const Vec2& y1,
                                    const Vec2& f1) {
  Trajectory::Segment seg{t0, h, y0, {}};
  for (int i = 0; i < 2; ++i) {
    const double dy = y1[i] - y0[i];
    seg.c[0][i] = h * f0[i];
    seg.c[1][i] = 3.0 * dy - h * (2.0 * f0[i] + f1[i]);
    seg.c[2][i] = -2.0 * dy + h * (f0[i] + f1[i]);
  }
  return seg;
}

// GSL calls back through C frames, so exceptions are parked here and
// rethrown once the stepper returns.
struct StiffContext {
  const Field& rhs;
  const JacobianField& jacobian;
  std::size_t evaluations = 0;
  std::exception_ptr failure;
};

int gsl_rhs(double t, const double y[], double dydt[], void* params) {
  auto* ctx = static_cast<StiffContext*>(params);
  try {
    const Vec2 f = ctx->rhs(t, {y[0], y[1]});
    dydt[0] = f[0];
    dydt[1] = f[1];
    ++ctx->evaluations;
  } catch (...) {
    ctx->failure = std::current_exception();
    return GSL_EBADFUNC;
  }
  return (std::isfinite(dydt[0]) && std::isfinite(dydt[1])) ? GSL_SUCCESS
                                                            : GSL_EBADFUNC;
}

int gsl_jacobian(double t, const double y[], double* dfdy, double dfdt[],
                 void* params) {
  auto* ctx = static_cast<StiffContext*>(params);
  try {
    const FieldJacobian j = ctx->jacobian(t, {y[0], y[1]});
    dfdy[0] = j.dstate[0][0];
    dfdy[1] = j.dstate[0][1];
    dfdy[2] = j.dstate[1][0];
    dfdy[3] = j.dstate[1][1];
    dfdt[0] = j.dt[0];
    dfdt[1] = j.dt[1];
  } catch (...) {
    ctx->failure = std::current_exception();
    return GSL_EBADFUNC;
  }
  return GSL_SUCCESS;
}

struct GslStepper {
  gsl_odeiv2_step* step = gsl_odeiv2_step_alloc(gsl_odeiv2_step_bsimp, 2);
  gsl_odeiv2_control* control;
  gsl_odeiv2_evolve* evolve = gsl_odeiv2_evolve_alloc(2);

  explicit GslStepper(const Tolerances& tol)
      : control(gsl_odeiv2_control_standard_new(tol.abs, tol.rel, 1.0, 0.0)) {}
  ~GslStepper() {
    gsl_odeiv2_evolve_free(evolve);
    gsl_odeiv2_control_free(control);
    gsl_odeiv2_step_free(step);
  }
  GslStepper(const GslStepper&) = delete;
  GslStepper& operator=(const GslStepper&) = delete;
};

}  // namespace

Trajectory integrate_stiff(const Field& rhs, const JacobianField& jacobian,
                           const Vec2& x0, double t0, double t1,
                           const Tolerances& tol, std::span<const Event> events,
                           const IntegrateOptions& options) {
  if (t0 == t1) {
    throw Error(ErrorCode::InvalidArgument, "integration interval is empty");
  }
  if (!(tol.rel > 0.0) || !(tol.abs > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  const int dir = t1 > t0 ? 1 : -1;

  StiffContext ctx{rhs, jacobian};
  gsl_odeiv2_system system{gsl_rhs, gsl_jacobian, 2, &ctx};
  GslStepper stepper(tol);
  gsl_set_error_handler_off();

  Trajectory traj(t0, x0);
  EventTracker tracker(events, t0, x0);

  double t = t0;
  double y[2] = {x0[0], x0[1]};
  Vec2 f_prev = rhs(t0, x0);
  double h = dir * initial_step_size(options, t0, t1);
  std::size_t steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > options.max_steps || step_underflow(t, h)) {
      traj.termination = Termination::StepFailure;
      break;
    }
    h = dir * std::min(std::abs(h), options.max_step);
    const double t_prev = t;
    const Vec2 y_prev = {y[0], y[1]};
    const std::size_t failed_before = stepper.evolve->failed_steps;
    const int status = gsl_odeiv2_evolve_apply(stepper.evolve, stepper.control,
                                               stepper.step, &system, &t, t1,
                                               &h, y);
    traj.rejected_steps += stepper.evolve->failed_steps - failed_before;
    if (ctx.failure) std::rethrow_exception(ctx.failure);
    if (status != GSL_SUCCESS || !std::isfinite(y[0]) || !std::isfinite(y[1])) {
      traj.termination = Termination::StepFailure;
      break;
    }
    const Vec2 y_new = {y[0], y[1]};
    const Vec2 f_new = rhs(t, y_new);
    const auto seg =
        hermite_segment(t_prev, t - t_prev, y_prev, f_prev, y_new, f_new);
    f_prev = f_new;
    if (accept_step(traj, tracker, options, seg, t_prev, t, y_new)) {
      traj.rhs_evaluations = ctx.evaluations + steps;
      return traj;
    }
  }
  traj.rhs_evaluations = ctx.evaluations + steps;
  if (traj.termination != Termination::StepFailure) {
    traj.termination = Termination::ReachedEnd;
  }
  return traj;
}

}  // namespace expander
