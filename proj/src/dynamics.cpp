#include "expander/dynamics.hpp"

#include <cmath>

namespace expander {

namespace {

// The two phi-dependent coefficients of psi_t, without the exp(2t) part:
//   psi coefficient  n - p + p/(1 + l^2 phi^2)
//   phi coefficient  n - p + (1 - l^2) p/(1 + l^2 phi^2)
struct Coefficients {
  double psi_coeff;
  double phi_coeff;
};

Coefficients coefficients(double phi, const LomseSpec& spec) {
  const double n = spec.n();
  const double p = spec.p();
  const double l2 = spec.lambda_sq();
  const double denom = 1.0 + l2 * phi * phi;
  return {n - p + p / denom, n - p + (1.0 - l2) * p / denom};
}

void require_positive_radius(double r) {
  if (!(r > 0.0)) {
    throw Error(ErrorCode::DegenerateRadius, "radius must be positive");
  }
}

}  // namespace

std::array<double, 4> ode_terms(double r, double f, double f_r, double f_rr,
                                const LomseSpec& spec, SimilarityConstant c) {
  require_positive_radius(r);
  const double n = spec.n();
  const double p = spec.p();
  const double l2 = spec.lambda_sq();
  return {f_rr / (1.0 + f_r * f_r), (n - p) * f_r / r,
          p * (r * f_r - l2 * f) / (r * r + l2 * f * f),
          value_of(c) * (r * f_r - f)};
}

double ode_residual(double r, double f, double f_r, double f_rr,
                    const LomseSpec& spec, SimilarityConstant c) {
  const auto terms = ode_terms(r, f, f_r, f_rr, spec, c);
  return terms[0] + terms[1] + terms[2] + terms[3];
}

double rhs_profile(double r, double f, double f_r, const LomseSpec& spec,
                   SimilarityConstant c) {
  const auto terms = ode_terms(r, f, f_r, 0.0, spec, c);
  return -(1.0 + f_r * f_r) * (terms[1] + terms[2] + terms[3]);
}

double psi_forcing_coefficient(double phi, double psi, SimilarityConstant c) {
  const double slope = phi + psi;
  return -value_of(c) * psi * (1.0 + slope * slope);
}

Vec2 rhs_phipsi_autonomous(double phi, double psi, const LomseSpec& spec) {
  const auto [a, b] = coefficients(phi, spec);
  const double slope = phi + psi;
  return {psi, -psi - (a * psi + b * phi) * (1.0 + slope * slope)};
}

Vec2 rhs_phipsi(const PhiPsiState& state, const LomseSpec& spec,
                SimilarityConstant c) {
  const auto [a, b] = coefficients(state.phi, spec);
  const double growth = value_of(c) * std::exp(2.0 * state.t);
  const double slope = state.phi + state.psi;
  const double psi_t =
      -state.psi -
      ((a + growth) * state.psi + b * state.phi) * (1.0 + slope * slope);
  return {state.psi, psi_t};
}

PhiPsiJacobian jacobian_phipsi(const PhiPsiState& state, const LomseSpec& spec,
                               SimilarityConstant c) {
  const double p = spec.p();
  const double l2 = spec.lambda_sq();
  const double phi = state.phi;
  const double psi = state.psi;
  const auto [a, b] = coefficients(phi, spec);
  const double growth = value_of(c) * std::exp(2.0 * state.t);
  const double denom = 1.0 + l2 * phi * phi;
  const double ddenom = 2.0 * l2 * phi / (denom * denom);
  const double da = -p * ddenom;
  const double db = -(1.0 - l2) * p * ddenom;
  const double slope = phi + psi;
  const double stretch = 1.0 + slope * slope;
  const double bracket = (a + growth) * psi + b * phi;

  PhiPsiJacobian jac{};
  jac.dstate[0] = {0.0, 1.0};
  jac.dstate[1][0] = -((da * psi + db * phi + b) * stretch + bracket * 2.0 * slope);
  jac.dstate[1][1] = -1.0 - ((a + growth) * stretch + bracket * 2.0 * slope);
  jac.dt = {0.0, -2.0 * growth * psi * stretch};
  return jac;
}

SaddleCoords to_saddle_coords(const PhiPsiState& state, const LomseSpec& spec) {
  const double n = spec.n();
  const double k = spec.k();
  const double d = n + 2.0 * k - 1.0;
  return {-state.t, (n + k) / d * state.phi + 1.0 / d * state.psi,
          (k - 1.0) / d * state.phi - 1.0 / d * state.psi};
}

PhiPsiState from_saddle_coords(const SaddleCoords& coords,
                               const LomseSpec& spec) {
  const double n = spec.n();
  const double k = spec.k();
  return {-coords.s, coords.x + coords.y,
          (k - 1.0) * coords.x - (n + k) * coords.y};
}

namespace {

// Pulls a (phi, psi)-space vector v = (dphi/ds, dpsi/ds) back to (X, Y).
Vec2 to_saddle_vector(const Vec2& v, const LomseSpec& spec) {
  const double n = spec.n();
  const double k = spec.k();
  const double d = n + 2.0 * k - 1.0;
  return {((n + k) * v[0] + v[1]) / d, ((k - 1.0) * v[0] - v[1]) / d};
}

}  // namespace

Vec2 saddle_autonomous(double x, double y, const LomseSpec& spec) {
  const PhiPsiState st = from_saddle_coords({0.0, x, y}, spec);
  const Vec2 field = rhs_phipsi_autonomous(st.phi, st.psi, spec);
  // d/ds = -d/dt
  return to_saddle_vector({-field[0], -field[1]}, spec);
}

Vec2 saddle_forcing(double x, double y, const LomseSpec& spec) {
  const PhiPsiState st = from_saddle_coords({0.0, x, y}, spec);
  const double coeff =
      psi_forcing_coefficient(st.phi, st.psi, SimilarityConstant::Expander);
  return to_saddle_vector({0.0, -coeff}, spec);
}

Vec2 saddle_rhs(const SaddleCoords& coords, const LomseSpec& spec) {
  const Vec2 base = saddle_autonomous(coords.x, coords.y, spec);
  const Vec2 forcing = saddle_forcing(coords.x, coords.y, spec);
  const double weight = std::exp(-2.0 * coords.s);
  return {base[0] + weight * forcing[0], base[1] + weight * forcing[1]};
}

Mat2 linearize(const LomseSpec& spec, Equilibrium at) noexcept {
  const double n = spec.n();
  const double pl2 = spec.p() * spec.lambda_sq();
  if (at == Equilibrium::Origin) {
    return {{{0.0, 1.0}, {pl2 - n, -n - 1.0}}};
  }
  return {{{0.0, 1.0}, {2.0 * n * (n / pl2 - 1.0), -n - 1.0}}};
}

}  // namespace expander
