#include "expander/params.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "expander/common.hpp"

namespace expander {

namespace {

std::optional<LomseFamily> match_family(int n, int p) {
  if (p >= 2 && p % 2 == 0 && n == p + 1) return LomseFamily::Complex;
  if (p >= 4 && p % 4 == 0 && n == p + 3) return LomseFamily::Quaternion;
  if (n == 15 && p == 8) return LomseFamily::Octonion;
  return std::nullopt;
}

}  // namespace

std::string_view family_name(LomseFamily family) noexcept {
  switch (family) {
    case LomseFamily::Complex: return "complex";
    case LomseFamily::Quaternion: return "quaternion";
    case LomseFamily::Octonion: return "octonion";
  }
  return "unknown";
}

std::string_view kind_name(EquilibriumKind kind) noexcept {
  return kind == EquilibriumKind::Sink ? "sink" : "spiral_sink";
}

LomseSpec::LomseSpec(int n, int p, int k, LomseFamily family)
    : n_(n), p_(p), k_(k), family_(family) {
  lambda_sq_ = static_cast<double>(k) * (n + k - 1) / p;
  lambda_ = std::sqrt(lambda_sq_);
  phi0_ = std::sqrt((p * lambda_sq_ - n) / ((n - p) * lambda_sq_));
}

LomseSpec validate_type(int n, int p, int k) {
  const std::string triple = "(" + std::to_string(n) + ", " +
                             std::to_string(p) + ", " + std::to_string(k) + ")";
  if (k < 2) {
    throw Error(ErrorCode::InadmissibleType,
                "inadmissible type " + triple + ": degree k must be >= 2");
  }
  if (k % 2 != 0) {
    throw Error(ErrorCode::NonEvenDegree,
                "inadmissible type " + triple + ": degree k must be even");
  }
  const auto family = match_family(n, p);
  if (!family) {
    throw Error(ErrorCode::InadmissibleType,
                "inadmissible type " + triple +
                    ": (n, p) is not of the form (2l+1, 2l), (4l+3, 4l) or "
                    "(15, 8)");
  }
  return LomseSpec(n, p, k, *family);
}

bool solvable_case(const LomseSpec& spec) noexcept {
  const int n = spec.n();
  const int k = spec.k();
  if (n >= 7) return true;
  if (n == 3) return k == 2;
  if (n == 5) return k == 2 || k == 4;
  return false;
}

double cone_point_discriminant(const LomseSpec& spec) noexcept {
  const double n = spec.n();
  const double k = spec.k();
  return n * n - 6.0 * n + 1.0 + 8.0 * n * n / (k * (k + n - 1.0));
}

EquilibriumClass classify_equilibria(const LomseSpec& spec) noexcept {
  const double n = spec.n();
  const double k = spec.k();
  EquilibriumClass out{};
  out.origin_eigenvalues = {k - 1.0, -n - k};
  out.discriminant = cone_point_discriminant(spec);
  const double centre = -(n + 1.0) / 2.0;
  if (out.discriminant >= 0.0) {
    const double half = 0.5 * std::sqrt(out.discriminant);
    out.cone_point_eigenvalues = {std::complex<double>(centre + half, 0.0),
                                  std::complex<double>(centre - half, 0.0)};
    out.kind = EquilibriumKind::Sink;
  } else {
    const double half = 0.5 * std::sqrt(-out.discriminant);
    out.cone_point_eigenvalues = {std::complex<double>(centre, half),
                                  std::complex<double>(centre, -half)};
    out.kind = EquilibriumKind::SpiralSink;
  }
  return out;
}

double hopf_cone_constant(int d) {
  if (d != 2 && d != 4 && d != 8) {
    throw Error(ErrorCode::InvalidArgument,
                "Hopf maps exist only for d = 2, 4, 8");
  }
  return std::sqrt((2.0 * d + 1.0) / (4.0 * (d - 1.0)));
}

double uniqueness_radius_bound(const LomseSpec& spec) noexcept {
  return std::pow(spec.lambda(), -2.0 / (2.0 * spec.k() - 3.0));
}

}  // namespace expander
