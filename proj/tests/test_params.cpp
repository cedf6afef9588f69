#include "doctest.h"

#include <cmath>
#include <string>

#include "expander/dynamics.hpp"
#include "expander/params.hpp"

using namespace expander;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("validate_type derives lambda and phi0") {
  const LomseSpec s = validate_type(3, 2, 2);
  CHECK(s.lambda() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.phi0() == doctest::Approx(std::sqrt(5.0) / 2.0).epsilon(1e-15));
  CHECK(s.family() == LomseFamily::Complex);

  const LomseSpec oct = validate_type(15, 8, 2);
  CHECK(oct.lambda() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(oct.phi0() == doctest::Approx(std::sqrt(17.0 / 28.0)).epsilon(1e-15));
  CHECK(oct.family() == LomseFamily::Octonion);

  CHECK(validate_type(7, 4, 2).family() == LomseFamily::Quaternion);
  CHECK(validate_type(7, 6, 2).family() == LomseFamily::Complex);
}

TEST_CASE("validate_type rejects triples outside the families") {
  CHECK(code_of([] { validate_type(4, 2, 2); }) == ErrorCode::InadmissibleType);
  CHECK(code_of([] { validate_type(3, 2, 3); }) == ErrorCode::NonEvenDegree);
  CHECK(code_of([] { validate_type(3, 2, 0); }) == ErrorCode::InadmissibleType);
  CHECK(code_of([] { validate_type(15, 9, 2); }) == ErrorCode::InadmissibleType);
  CHECK(code_of([] { validate_type(-3, -2, 2); }) == ErrorCode::InadmissibleType);
  try {
    validate_type(4, 2, 2);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("inadmissible") != std::string::npos);
  }
}

TEST_CASE("Hopf constants agree with phi0") {
  for (int d : {2, 4, 8}) {
    const LomseSpec s = validate_type(2 * d - 1, d, 2);
    CHECK(std::abs(s.phi0() - hopf_cone_constant(d)) < 1e-12);
  }
  CHECK_THROWS_AS(hopf_cone_constant(3), Error);
}

TEST_CASE("solvable cases") {
  CHECK(solvable_case(validate_type(3, 2, 2)));
  CHECK(solvable_case(validate_type(5, 4, 2)));
  CHECK(solvable_case(validate_type(5, 4, 4)));
  CHECK(solvable_case(validate_type(7, 4, 2)));
  CHECK_FALSE(solvable_case(validate_type(3, 2, 4)));
  CHECK_FALSE(solvable_case(validate_type(5, 4, 6)));
}

TEST_CASE("classification examples") {
  const EquilibriumClass c = classify_equilibria(validate_type(3, 2, 2));
  CHECK(c.origin_eigenvalues[0] == 1.0);
  CHECK(c.origin_eigenvalues[1] == -5.0);
  CHECK(c.cone_point_eigenvalues[0].real() == doctest::Approx(-1.5));
  CHECK(c.cone_point_eigenvalues[1].real() == doctest::Approx(-2.5));
  CHECK(c.kind == EquilibriumKind::Sink);

  const EquilibriumClass spiral = classify_equilibria(validate_type(3, 2, 4));
  CHECK(spiral.discriminant == doctest::Approx(-5.0));
  CHECK(spiral.kind == EquilibriumKind::SpiralSink);
  CHECK(spiral.cone_point_eigenvalues[0].imag() != 0.0);

  CHECK(classify_equilibria(validate_type(5, 4, 2)).kind == EquilibriumKind::Sink);
  CHECK(kind_name(EquilibriumKind::SpiralSink) == "spiral_sink");
}

TEST_CASE("grid properties over the three families") {
  int checked = 0;
  for (int n = 3; n <= 31; ++n) {
    for (int p = 1; p < n; ++p) {
      for (int k = 2; k <= 10; k += 2) {
        LomseSpec s = validate_type(3, 2, 2);
        try {
          s = validate_type(n, p, k);
        } catch (const Error&) {
          continue;
        }
        ++checked;
        const double l2 = s.lambda_sq();
        CHECK(l2 == doctest::Approx(double(k) * (n + k - 1) / p).epsilon(1e-15));
        CHECK(p * l2 - n > 0.0);
        CHECK(s.phi0() * s.phi0() ==
              doctest::Approx((p * l2 - n) / ((n - p) * l2)).epsilon(1e-14));

        const Mat2 a = linearize(s, Equilibrium::Origin);
        const EquilibriumClass c = classify_equilibria(s);
        const double tr = a[0][0] + a[1][1];
        const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        CHECK(tr == doctest::Approx(-n - 1.0));
        CHECK(det == doctest::Approx(-(k * (n + k - 1.0) - n)));
        CHECK(c.origin_eigenvalues[0] + c.origin_eigenvalues[1] == doctest::Approx(tr));
        CHECK(c.origin_eigenvalues[0] * c.origin_eigenvalues[1] == doctest::Approx(det));

        const bool expect_sink = cone_point_discriminant(s) >= 0.0;
        CHECK((c.kind == EquilibriumKind::Sink) == expect_sink);
        if (n >= 7) CHECK(c.kind == EquilibriumKind::Sink);
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("uniqueness radius bound") {
  CHECK(uniqueness_radius_bound(validate_type(3, 2, 2)) == doctest::Approx(0.25));
  CHECK(uniqueness_radius_bound(validate_type(5, 4, 2)) ==
        doctest::Approx(std::pow(std::sqrt(3.0), -2.0)));
}
