#include "expander/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "expander/common.hpp"

namespace expander {

namespace {

constexpr double kInflowTolerance = 1e-10;

}  // namespace

double InvariantRegion::barrier(double phi) const noexcept {
  const double n = spec_.n();
  const double p = spec_.p();
  const double l2 = spec_.lambda_sq();
  const double g = coefficient_ *
                   ((l2 - 1.0) * p / (1.0 + l2 * phi * phi) - (n - p)) * phi /
                   (n - p);
  // g >= 0 on [0, phi0]; at phi0 the bracket cancels only up to round-off,
  // which the exp(2t) term would otherwise blow up.
  return (phi >= 0.0 && phi <= spec_.phi0()) ? std::max(g, 0.0) : g;
}

double InvariantRegion::barrier_slope(double phi) const noexcept {
  const double n = spec_.n();
  const double p = spec_.p();
  const double l2 = spec_.lambda_sq();
  const double denom = 1.0 + l2 * phi * phi;
  const double bracket = (l2 - 1.0) * p / denom - (n - p);
  const double dbracket = -(l2 - 1.0) * p * 2.0 * l2 * phi / (denom * denom);
  return coefficient_ * (bracket + phi * dbracket) / (n - p);
}

bool InvariantRegion::contains(const PhiPsiState& state,
                               double slack) const noexcept {
  const double phi = state.phi;
  const double psi = state.psi;
  if (phi < -slack || phi > spec_.phi0() + slack) return false;
  if (psi < -slack) return false;
  const double cap = barrier(std::clamp(phi, 0.0, spec_.phi0()));
  return psi <= cap + slack;
}

double InvariantRegion::excess(const PhiPsiState& state) const noexcept {
  const double phi = state.phi;
  const double psi = state.psi;
  const double cap = barrier(std::clamp(phi, 0.0, spec_.phi0()));
  return std::max({0.0, -phi, phi - spec_.phi0(), -psi, psi - cap});
}

InvariantRegion build_region(const LomseSpec& spec) {
  if (!solvable_case(spec)) {
    throw Error(ErrorCode::UnsupportedCase,
                "no invariant region for (" + std::to_string(spec.n()) + ", " +
                    std::to_string(spec.p()) + ", " + std::to_string(spec.k()) +
                    "): cone point is a spiral sink");
  }
  const double coefficient = spec.n() >= 7 ? 2.0 : 1.5;
  return InvariantRegion(spec, coefficient);
}

InvarianceReport verify_invariance(const InvariantRegion& region, double t_from,
                                   int n_samples) {
  if (n_samples < 100) {
    throw Error(ErrorCode::InvalidArgument, "need at least 100 samples");
  }
  const LomseSpec& spec = region.spec();
  const double phi0 = spec.phi0();

  InvarianceReport report{};
  report.samples = n_samples;
  report.min_bottom_inflow = std::numeric_limits<double>::infinity();
  report.min_barrier_inflow = std::numeric_limits<double>::infinity();

  // psi = 0 kills the exp(2t) term, so the bottom edge is time independent.
  for (int i = 0; i < n_samples; ++i) {
    const double phi = phi0 * i / (n_samples - 1);
    const double inflow = rhs_phipsi_autonomous(phi, 0.0, spec)[1];
    report.min_bottom_inflow = std::min(report.min_bottom_inflow, inflow);
  }

  auto barrier_inflow = [&](double phi, const Vec2& field) {
    return region.barrier_slope(phi) * field[0] - field[1];
  };

  for (int step = -1; step <= 20; ++step) {
    for (int i = 0; i < n_samples; ++i) {
      const double phi = phi0 * i / (n_samples - 1);
      const double psi = region.barrier(phi);
      const Vec2 field =
          step < 0 ? rhs_phipsi_autonomous(phi, psi, spec)
                   : rhs_phipsi({t_from + step, phi, psi}, spec);
      const double inflow = barrier_inflow(phi, field);
      if (inflow < report.min_barrier_inflow) {
        report.min_barrier_inflow = inflow;
        report.phi_at_min_barrier = phi;
      }
    }
  }

  report.pass = report.min_bottom_inflow >= -kInflowTolerance &&
                report.min_barrier_inflow >= -kInflowTolerance;
  return report;
}

}  // namespace expander
