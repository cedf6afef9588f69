#include "doctest.h"

#include <cmath>
#include <random>

#include "expander/barrier.hpp"
#include "expander/integrator.hpp"

using namespace expander;

TEST_CASE("barrier shape") {
  const InvariantRegion r = build_region(validate_type(3, 2, 2));
  const double phi0 = r.spec().phi0();
  CHECK(r.coefficient() == 1.5);
  CHECK(r.barrier(0.0) == 0.0);
  CHECK(std::abs(r.barrier(phi0)) < 1e-14);
  CHECK(r.barrier_slope(0.0) == doctest::Approx(7.5));
  for (int i = 0; i < 1000; ++i) {
    const double phi = phi0 * (0.01 + 0.98 * i / 999.0);
    CHECK(r.barrier(phi) > 0.0);
  }

  const InvariantRegion r7 = build_region(validate_type(7, 4, 2));
  CHECK(r7.coefficient() == 2.0);
  CHECK(r7.barrier_slope(0.0) == doctest::Approx(6.0));
}

TEST_CASE("barrier slope exceeds k - 1 on the solvable grid") {
  for (int n = 3; n <= 31; ++n) {
    for (int p = 1; p < n; ++p) {
      for (int k = 2; k <= 10; k += 2) {
        try {
          const LomseSpec s = validate_type(n, p, k);
          if (!solvable_case(s)) continue;
          const InvariantRegion r = build_region(s);
          CHECK(r.barrier_slope(0.0) > k - 1.0);
          CHECK(std::abs(r.barrier(s.phi0())) < 1e-12);
        } catch (const Error&) {
        }
      }
    }
  }
}

TEST_CASE("unsupported cases are refused") {
  CHECK_THROWS_AS(build_region(validate_type(3, 2, 4)), Error);
  try {
    build_region(validate_type(5, 4, 6));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedCase);
  }
}

TEST_CASE("contains") {
  const InvariantRegion r = build_region(validate_type(3, 2, 2));
  const double half = r.spec().phi0() / 2.0;
  CHECK(r.contains({0.0, 0.0, 0.0}));
  CHECK(r.contains({0.0, half, r.barrier(half)}, 0.0));
  CHECK_FALSE(r.contains({0.0, half, -0.01}));
  CHECK_FALSE(r.contains({0.0, r.spec().phi0() + 1e-3, 0.0}));
  CHECK(r.contains({0.0, half, -1e-10}));
  CHECK(r.excess({0.0, half, -0.01}) == doctest::Approx(0.01));
  CHECK(r.excess({0.0, half, 0.0}) == 0.0);
}

TEST_CASE("sampled invariance") {
  for (auto [n, p, k] : {std::tuple{3, 2, 2}, {5, 4, 2}, {5, 4, 4}, {7, 4, 2}}) {
    const InvarianceReport rep = verify_invariance(build_region(validate_type(n, p, k)), 0.0, 10000);
    CHECK(rep.pass);
    CHECK(rep.min_bottom_inflow >= -1e-10);
    CHECK(rep.min_barrier_inflow >= -1e-10);
  }
  CHECK_THROWS_AS(verify_invariance(build_region(validate_type(3, 2, 2)), 0.0, 10), Error);
}

TEST_CASE("bottom edge inflow vanishes at the cone point") {
  const LomseSpec s = validate_type(3, 2, 2);
  CHECK(std::abs(rhs_phipsi_autonomous(s.phi0(), 0.0, s)[1]) < 1e-14);
}

TEST_CASE("random interior trajectories stay inside") {
  const LomseSpec s = validate_type(3, 2, 2);
  const InvariantRegion r = build_region(s);
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rhs = [&](double t, const Vec2& z) { return rhs_phipsi({t, z[0], z[1]}, s); };
  auto jac = [&](double t, const Vec2& z) {
    const PhiPsiJacobian j = jacobian_phipsi({t, z[0], z[1]}, s);
    return FieldJacobian{j.dstate, j.dt};
  };
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double phi = s.phi0() * u(gen);
    const double psi = r.barrier(phi) * u(gen);
    const Trajectory path = integrate_stiff(rhs, jac, {phi, psi}, 0.0, 15.0, {1e-10, 1e-14});
    for (std::size_t j = 0; j < path.size(); ++j) {
      const Vec2 z = path.states()[j];
      worst = std::max(worst, r.excess({path.times()[j], z[0], z[1]}));
    }
  }
  CHECK(worst <= 1e-7);
}
