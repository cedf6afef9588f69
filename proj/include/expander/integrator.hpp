#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "expander/common.hpp"

namespace expander {

using Field = std::function<Vec2(double t, const Vec2& x)>;

/// Jacobian of a planar field: row-major d(field)/dx and d(field)/dt.
struct FieldJacobian {
  std::array<std::array<double, 2>, 2> dstate;
  Vec2 dt;
};
using JacobianField = std::function<FieldJacobian(double t, const Vec2& x)>;

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
};

/// Sign-change detector. direction = +1 fires on a rising crossing only,
/// -1 on a falling one, 0 on either.
struct Event {
  std::string name;
  std::function<double(double t, const Vec2& x)> fn;
  int direction = 0;
};

/// Evaluated after every accepted step; returning true ends the integration.
using StopCondition = std::function<bool(double t, const Vec2& x)>;

struct IntegrateOptions {
  /// Zero selects 1e-4 * |t1 - t0|.
  double initial_step = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
  StopCondition stop;
};

enum class Termination { ReachedEnd, Event, Stopped, StepFailure };

/// Accepted steps of one integration, with a piecewise polynomial dense
/// output. Sample times are strictly monotone in the direction of
/// integration.
class Trajectory {
 public:
  /// x(t0 + theta*h) = y0 + c[0] theta + c[1] theta^2 + ... + c[4] theta^5
  struct Segment {
    double t0;
    double h;
    Vec2 y0;
    std::array<Vec2, 5> c;

    Vec2 value(double theta) const noexcept;
    /// d/dtheta, divide by h for d/dt.
    Vec2 slope(double theta) const noexcept;
  };

  Trajectory() = default;
  Trajectory(double t0, const Vec2& x0);

  /// Appends an accepted step ending at (t, x) whose interpolant is `segment`.
  void extend(double t, const Vec2& x, const Segment& segment);
  /// Concatenates a trajectory that starts where this one ends.
  void append(const Trajectory& next);
  /// Replaces the state of the final sample (used when an event truncates
  /// the last step).
  void truncate_last(double t, const Vec2& x);
  /// Drops everything after time t (exclusive), re-ending the trajectory at t.
  void truncate_at(double t);

  std::span<const double> times() const noexcept { return times_; }
  std::span<const Vec2> states() const noexcept { return states_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Vec2& front() const { return states_.front(); }
  const Vec2& back() const { return states_.back(); }
  /// +1 forward in time, -1 backward, 0 for a single sample.
  int direction() const noexcept;
  bool covers(double t) const noexcept;

  /// Dense evaluation; throws Error{InvalidArgument} outside the covered range.
  Vec2 at(double t) const;
  /// Time derivative of the dense interpolant.
  Vec2 derivative_at(double t) const;

  Termination termination = Termination::ReachedEnd;
  std::string event_name;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;

 private:
  std::size_t locate(double t) const;

  std::vector<double> times_;
  std::vector<Vec2> states_;
  std::vector<Segment> segments_;
};

/// Adaptive Dormand-Prince 5(4) integration with PI step control and
/// quartic dense output. Works in either time direction. Events are located
/// on the dense output to 1e-12 in t; the earliest crossing stops the run.
Trajectory integrate(const Field& rhs, const Vec2& x0, double t0, double t1,
                     const Tolerances& tol, std::span<const Event> events = {},
                     const IntegrateOptions& options = {});

/// Implicit Bulirsch-Stoer (GSL bsimp) integration for stiff planar
/// systems, with cubic Hermite dense output. Same contract as integrate();
/// cap max_step when the dense output matters.
Trajectory integrate_stiff(const Field& rhs, const JacobianField& jacobian,
                           const Vec2& x0, double t0, double t1,
                           const Tolerances& tol,
                           std::span<const Event> events = {},
                           const IntegrateOptions& options = {});

}  // namespace expander
