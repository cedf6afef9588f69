#pragma once

#include <array>
#include <complex>
#include <string_view>

namespace expander {

/// Which Hopf-map generalization an admissible (n, p) pair belongs to.
enum class LomseFamily {
  Complex,     // (2l+1, 2l)
  Quaternion,  // (4l+3, 4l)
  Octonion,    // (15, 8)
};

std::string_view family_name(LomseFamily family) noexcept;

/// Admissible (n, p, k) triple of a Lawson-Osserman map with one nonzero
/// singular value, together with the constants every other module reads.
///
/// Instances only come out of validate_type(); the derived constants are
/// fixed at construction.
class LomseSpec {
 public:
  int n() const noexcept { return n_; }
  int p() const noexcept { return p_; }
  int k() const noexcept { return k_; }
  LomseFamily family() const noexcept { return family_; }

  /// Common nonzero singular value, sqrt(k(n+k-1)/p).
  double lambda() const noexcept { return lambda_; }
  double lambda_sq() const noexcept { return lambda_sq_; }
  /// Slope tan(theta) of the minimal cone; the nontrivial equilibrium.
  double phi0() const noexcept { return phi0_; }

  friend bool operator==(const LomseSpec&, const LomseSpec&) = default;

 private:
  friend LomseSpec validate_type(int n, int p, int k);
  LomseSpec(int n, int p, int k, LomseFamily family);

  int n_;
  int p_;
  int k_;
  LomseFamily family_;
  double lambda_sq_;
  double lambda_;
  double phi0_;
};

/// Throws Error{InadmissibleType} when (n, p) fits none of the three
/// families, Error{NonEvenDegree} for odd k.
LomseSpec validate_type(int n, int p, int k);

/// Cases covered by the existence theorem: (3,2,2), (5,4,2), (5,4,4), n >= 7.
bool solvable_case(const LomseSpec& spec) noexcept;

enum class EquilibriumKind { Sink, SpiralSink };

std::string_view kind_name(EquilibriumKind kind) noexcept;

struct EquilibriumClass {
  /// (k - 1, -n - k): the origin is a saddle.
  std::array<double, 2> origin_eigenvalues;
  /// Larger real part first; complex conjugate pair for spiral sinks.
  std::array<std::complex<double>, 2> cone_point_eigenvalues;
  double discriminant;
  EquilibriumKind kind;
};

/// Discriminant n^2 - 6n + 1 + 8n^2/(k(k+n-1)) of the cone-point linearization.
double cone_point_discriminant(const LomseSpec& spec) noexcept;

EquilibriumClass classify_equilibria(const LomseSpec& spec) noexcept;

/// Lawson-Osserman cone constant sqrt((2d+1)/(4(d-1))) for the Hopf maps
/// d = 2, 4, 8. Independent of phi0(); used as a cross-check.
double hopf_cone_constant(int d);

/// Upper end lambda^(-2/(2k-3)) of the Dirichlet radius range on which
/// solutions are unique.
double uniqueness_radius_bound(const LomseSpec& spec) noexcept;

}  // namespace expander
