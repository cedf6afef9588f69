#pragma once

#include <array>

#include "expander/common.hpp"
#include "expander/params.hpp"

namespace expander {

/// Sign of C in H = C F^perp. Only the expander case is solved for; the
/// other two are kept so the right-hand sides cover the whole family.
enum class SimilarityConstant : int { Shrinker = -1, Minimal = 0, Expander = 1 };

inline double value_of(SimilarityConstant c) noexcept {
  return static_cast<double>(static_cast<int>(c));
}

/// A point of the first-order system in log-radius time: t = log r,
/// phi = f/r, psi = d(phi)/dt.
struct PhiPsiState {
  double t;
  double phi;
  double psi;
};

/// f_rr solved from the graph ODE
///   f_rr/(1+f_r^2) + (n-p) f_r/r + p(r f_r - l^2 f)/(r^2 + l^2 f^2) + C(r f_r - f) = 0.
/// Throws Error{DegenerateRadius} for r <= 0.
double rhs_profile(double r, double f, double f_r, const LomseSpec& spec,
                   SimilarityConstant c = SimilarityConstant::Expander);

/// Left-hand side of the graph ODE.
double ode_residual(double r, double f, double f_r, double f_rr,
                    const LomseSpec& spec,
                    SimilarityConstant c = SimilarityConstant::Expander);

/// The four terms of the graph ODE in order; their absolute sum is the
/// natural scale for relative residuals.
std::array<double, 4> ode_terms(double r, double f, double f_r, double f_rr,
                                const LomseSpec& spec, SimilarityConstant c);

/// (phi_t, psi_t) of the first-order system.
Vec2 rhs_phipsi(const PhiPsiState& state, const LomseSpec& spec,
                SimilarityConstant c = SimilarityConstant::Expander);

/// Same system with the exp(2t) term dropped.
Vec2 rhs_phipsi_autonomous(double phi, double psi, const LomseSpec& spec);

/// Coefficient of exp(2t) in psi_t, i.e. -C psi (1 + (phi+psi)^2).
double psi_forcing_coefficient(double phi, double psi, SimilarityConstant c);

/// Jacobian d(phi_t, psi_t)/d(phi, psi) (row-major) and d/dt of the field.
struct PhiPsiJacobian {
  std::array<std::array<double, 2>, 2> dstate;
  Vec2 dt;
};

PhiPsiJacobian jacobian_phipsi(const PhiPsiState& state, const LomseSpec& spec,
                               SimilarityConstant c = SimilarityConstant::Expander);

/// Coordinates diagonalizing the origin linearization, in reversed time
/// s = -t: phi = X + Y, psi = (k-1) X - (n+k) Y.
struct SaddleCoords {
  double s;
  double x;
  double y;
};

SaddleCoords to_saddle_coords(const PhiPsiState& state, const LomseSpec& spec);
PhiPsiState from_saddle_coords(const SaddleCoords& coords, const LomseSpec& spec);

/// Split of the (X, Y) field in s: full field = autonomous + exp(-2s) * forcing.
Vec2 saddle_autonomous(double x, double y, const LomseSpec& spec);
Vec2 saddle_forcing(double x, double y, const LomseSpec& spec);

/// d(X, Y)/ds for the expander, C = +1.
Vec2 saddle_rhs(const SaddleCoords& coords, const LomseSpec& spec);

enum class Equilibrium { Origin, ConePoint };

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Linearization of the autonomous system at one of its two equilibria.
Mat2 linearize(const LomseSpec& spec, Equilibrium at) noexcept;

}  // namespace expander
