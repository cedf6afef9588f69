#include "doctest.h"

#include <cmath>
#include <vector>

#include "expander/integrator.hpp"

using namespace expander;

namespace {

Vec2 decay(double, const Vec2& x) { return {-x[0], 0.0}; }

FieldJacobian decay_jacobian(double, const Vec2&) {
  return {{{{-1.0, 0.0}, {0.0, 0.0}}}, {0.0, 0.0}};
}

Vec2 cosine(double t, const Vec2&) { return {std::cos(t), 0.0}; }

}  // namespace

TEST_CASE("linear decay") {
  const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, 1.0, {1e-10, 1e-12});
  CHECK(tr.termination == Termination::ReachedEnd);
  CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-9);
  CHECK(tr.t_end() == 1.0);
}

TEST_CASE("event locates log 2") {
  const Event half{"half", [](double, const Vec2& x) { return x[0] - 0.5; }, 0};
  const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, 5.0, {1e-10, 1e-12}, {&half, 1});
  CHECK(tr.termination == Termination::Event);
  CHECK(tr.event_name == "half");
  CHECK(std::abs(tr.t_end() - std::log(2.0)) < 1e-9);
}

TEST_CASE("event direction filter") {
  const Event rising{"up", [](double, const Vec2& x) { return x[0] - 0.5; }, +1};
  const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, 2.0, {1e-10, 1e-12}, {&rising, 1});
  CHECK(tr.termination == Termination::ReachedEnd);
}

TEST_CASE("earliest event wins") {
  const Event events[] = {
      {"late", [](double, const Vec2& x) { return x[0] - 0.25; }, 0},
      {"early", [](double, const Vec2& x) { return x[0] - 0.5; }, 0},
  };
  const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, 5.0, {1e-10, 1e-12}, events);
  CHECK(tr.event_name == "early");
}

TEST_CASE("backward integration grows") {
  const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, -2.0, {1e-10, 1e-12});
  CHECK(tr.direction() == -1);
  CHECK(tr.back()[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
  CHECK(tr.at(-1.0)[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
}

TEST_CASE("dense output reproduces samples and the derivative") {
  const Trajectory tr = integrate(cosine, {0.0, 0.0}, 0.0, 6.0, {1e-10, 1e-12});
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.at(tr.times()[i])[0] == doctest::Approx(tr.states()[i][0]).epsilon(1e-14));
  }
  for (double t = 0.05; t < 6.0; t += 0.37) {
    CHECK(std::abs(tr.at(t)[0] - std::sin(t)) < 1e-8);
    CHECK(std::abs(tr.derivative_at(t)[0] - std::cos(t)) < 1e-6);
  }
  CHECK_THROWS_AS(tr.at(7.0), Error);
}

TEST_CASE("empirical order on cos t") {
  std::vector<double> errs, evals;
  for (int i = 0; i < 5; ++i) {
    const double tol = 1e-5 * std::pow(10.0, -i);
    const Trajectory tr = integrate(cosine, {0.0, 0.0}, 0.0, 20.0, {tol, tol});
    errs.push_back(std::abs(tr.back()[0] - std::sin(20.0)));
    evals.push_back(double(tr.rhs_evaluations));
  }
  for (int i = 0; i < 4; ++i) CHECK(errs[i + 1] <= errs[i]);
  // error ~ h^p ~ (work)^-p
  const double order = -std::log(errs.back() / errs.front()) / std::log(evals.back() / evals.front());
  MESSAGE("empirical order " << order);
  CHECK(order >= 4.0);
}

TEST_CASE("halving tolerance never hurts on the linear problem") {
  double prev = 1.0;
  for (int i = 0; i < 5; ++i) {
    const double tol = 1e-6 / std::pow(2.0, i);
    const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, 3.0, {tol, tol * 1e-2});
    const double err = std::abs(tr.back()[0] - std::exp(-3.0));
    CHECK(err <= prev);
    prev = err;
  }
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(integrate(decay, {1.0, 0.0}, 1.0, 1.0, {}), Error);
  CHECK_THROWS_AS(integrate(decay, {1.0, 0.0}, 0.0, 1.0, {0.0, 1e-12}), Error);
}

TEST_CASE("step failure is reported") {
  auto blowup = [](double, const Vec2& x) { return Vec2{x[0] * x[0], 0.0}; };
  const Trajectory tr = integrate(blowup, {1.0, 0.0}, 0.0, 2.0, {1e-10, 1e-12});
  CHECK(tr.termination == Termination::StepFailure);
  CHECK(tr.t_end() < 1.0);
}

TEST_CASE("stop condition") {
  IntegrateOptions opts;
  opts.stop = [](double, const Vec2& x) { return x[0] < 0.1; };
  const Trajectory tr = integrate(decay, {1.0, 0.0}, 0.0, 10.0, {1e-10, 1e-12}, {}, opts);
  CHECK(tr.termination == Termination::Stopped);
  CHECK(tr.back()[0] < 0.1);
}

TEST_CASE("stiff integrator") {
  const Trajectory tr = integrate_stiff(decay, decay_jacobian, {1.0, 0.0}, 0.0, 1.0, {1e-10, 1e-12});
  CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-9);
  const Trajectory back = integrate_stiff(decay, decay_jacobian, {1.0, 0.0}, 0.0, -2.0, {1e-10, 1e-12});
  CHECK(back.back()[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-9));

  // y' = -1e6 (y - cos t): a stiff relaxation onto cos t.
  auto stiff = [](double t, const Vec2& x) { return Vec2{-1e6 * (x[0] - std::cos(t)), 0.0}; };
  auto stiff_j = [](double t, const Vec2&) {
    return FieldJacobian{{{{-1e6, 0.0}, {0.0, 0.0}}}, {-1e6 * std::sin(t), 0.0}};
  };
  const Trajectory s = integrate_stiff(stiff, stiff_j, {1.0, 0.0}, 0.0, 2.0, {1e-8, 1e-10});
  CHECK(s.termination == Termination::ReachedEnd);
  CHECK(s.size() < 2000);
  CHECK(s.back()[0] == doctest::Approx(std::cos(2.0)).epsilon(1e-5));
}

TEST_CASE("trajectory append and truncate") {
  Trajectory a = integrate(decay, {1.0, 0.0}, 0.0, 1.0, {1e-10, 1e-12});
  const Trajectory b = integrate(decay, a.back(), 1.0, 2.0, {1e-10, 1e-12});
  a.append(b);
  CHECK(a.t_end() == 2.0);
  CHECK(a.at(1.5)[0] == doctest::Approx(std::exp(-1.5)).epsilon(1e-9));
  a.truncate_at(1.25);
  CHECK(a.t_end() == 1.25);
  CHECK(a.back()[0] == doctest::Approx(std::exp(-1.25)).epsilon(1e-9));
  CHECK_THROWS_AS(a.append(b), Error);
}
