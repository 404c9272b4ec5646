#pragma once

#include "qlm/weyl.hpp"

namespace qlm {

/// m_H = sqrt(|Sigma|/16 pi) (1 - (1/16 pi) int |H|^2 dSigma).
inline double hawking_mass(const SurfaceDataset& data) {
  const MetricField& s = data.sigma;
  const double I = (data.normH.v.square() * s.area_measure()).sum();
  return std::sqrt(s.area() / (16.0 * kPi)) * (1.0 - I / (16.0 * kPi));
}

namespace detail {
/// Mean curvature H_0 of the isometric embedding of sigma into R^3.
inline ScalarField weyl_mean_curvature(const MetricField& sigma, const WeylOptions& opt) {
  ReferenceGeometry R =
      reference_geometry(sigma, ScalarField::zero(sigma.grid()), opt);
  return R.Hhat;
}
}  // namespace detail

/// Default solver settings for energy evaluations: the functionals inherit
/// the embedding defect, so it is kept well below the reporting tolerances.
inline WeylOptions energy_options() {
  WeylOptions o;
  o.tol = 1e-11;
  return o;
}

/// (1/8 pi) int (H_0 - H) dSigma with H_0 from the isometric embedding of
/// sigma into R^3; requires the hypersurface mean curvature H.
inline double brown_york_mass(const SurfaceDataset& data,
                              const WeylOptions& opt = energy_options()) {
  if (!data.meanH)
    throw std::invalid_argument(
        "brown_york_mass: dataset carries no hypersurface mean curvature");
  ScalarField H0 = detail::weyl_mean_curvature(data.sigma, opt);
  return ((H0.v - data.meanH->v) * data.sigma.area_measure()).sum() / (8.0 * kPi);
}

/// (1/8 pi) int (H_0 - |H|) dSigma.
inline double liu_yau_mass(const SurfaceDataset& data,
                           const WeylOptions& opt = energy_options()) {
  ScalarField H0 = detail::weyl_mean_curvature(data.sigma, opt);
  return ((H0.v - data.normH.v) * data.sigma.area_measure()).sum() / (8.0 * kPi);
}

/// rho and j of the pair (data, tau) relative to a solved reference:
///   rho = [sqrt(|H_0|^2 + q) - sqrt(|H|^2 + q)] / sqrt(1+|grad tau|^2),
///     q = (Delta tau)^2 / (1+|grad tau|^2)
///   j_a = rho tau_a - d_a asinh(rho Delta tau / (|H_0||H|))
///         - (alpha_{H_0})_a + (alpha_H)_a.
inline std::pair<ScalarField, VectorField> rho_and_j(const SurfaceDataset& data,
                                                     const ReferenceGeometry& ref,
                                                     const ScalarField& tau) {
  const MetricField& sig = data.sigma;
  const GridPtr& g = sig.grid();
  if (!(data.normH.v > 0.0).all() || !(ref.normH0.v > 0.0).all())
    throw std::domain_error("rho_and_j: |H| and |H_0| must be positive");
  VectorField dtau = gradient(tau, sig);
  ArrayXd root = (1.0 + norm_squared(sig, dtau)).sqrt();
  ArrayXd lap = laplace_beltrami(tau, sig).v;
  ArrayXd q = lap.square() / root.square();
  ArrayXd rho = ((ref.normH0.v.square() + q).sqrt() - (data.normH.v.square() + q).sqrt()) /
                root;
  ArrayXd sarg = rho * lap / (ref.normH0.v * data.normH.v);
  ScalarField s{g, sarg.unaryExpr([](double x) { return std::asinh(x); })};
  VectorField ds = gradient(s, sig);
  VectorField j{g, rho * dtau.c1 - ds.c1 - ref.alphaH0.c1 + data.alphaH.c1,
                rho * dtau.c2 - ds.c2 - ref.alphaH0.c2 + data.alphaH.c2};
  return {ScalarField{g, std::move(rho)}, std::move(j)};
}

/// (1/8 pi) int (rho + j_a grad^a tau) dSigma.
inline double energy_canonical(const ScalarField& rho, const VectorField& j,
                               const ScalarField& tau, const MetricField& sigma) {
  VectorField dtau = gradient(tau, sigma);
  return ((rho.v + inner(sigma, j, dtau)) * sigma.area_measure()).sum() / (8.0 * kPi);
}

struct EnergyReport {
  double value = 0.0;      // (1/8 pi)[int Hhat dSigma_hat - int physical side]
  double canonical = 0.0;  // the same energy through (rho, j)
  ScalarField theta;       // physical-side boost angle
  ScalarField rho;
  VectorField j;
  ScalarField div_j;
  double reference_defect = 0.0;
};

/// Evaluates the quasi-local energy for (data, tau) pairs on a fixed grid,
/// keeping the reference solver warm so that sequences of nearby tau
/// (line searches, finite-difference probes) are cheap.
class EnergyEvaluator {
 public:
  explicit EnergyEvaluator(GridPtr g, WeylOptions opt = energy_options())
      : ref_(std::move(g), opt) {}

  EnergyReport evaluate(const SurfaceDataset& data, const ScalarField& tau) {
    ReferenceGeometry R = ref_.build(data.sigma, tau);
    return evaluate_with(data, tau, R);
  }

  EnergyReport evaluate_with(const SurfaceDataset& data, const ScalarField& tau,
                             const ReferenceGeometry& R) const {
    const MetricField& sig = data.sigma;
    const GridPtr& g = sig.grid();
    detail::check_same_grid(g, tau.grid, "EnergyEvaluator");
    if (!(data.normH.v > 0.0).all())
      throw std::domain_error("EnergyEvaluator: |H| must be positive everywhere");

    VectorField dtau = gradient(tau, sig);
    ArrayXd root = (1.0 + norm_squared(sig, dtau)).sqrt();
    ArrayXd lap = laplace_beltrami(tau, sig).v;
    ArrayXd targ = -lap / (data.normH.v * root);
    ScalarField theta{g, targ.unaryExpr([](double x) { return std::asinh(x); })};
    VectorField dtheta = gradient(theta, sig);

    const double Eref = (R.Hhat.v * R.sigma_hat.area_measure()).sum();
    ArrayXd phys = root * theta.v.cosh() * data.normH.v -
                   inner(sig, dtau, dtheta) - inner(sig, data.alphaH, dtau);
    const double Ephys = (phys * sig.area_measure()).sum();

    EnergyReport rep;
    rep.value = (Eref - Ephys) / (8.0 * kPi);
    auto [rho, j] = rho_and_j(data, R, tau);
    rep.canonical = energy_canonical(rho, j, tau, sig);
    rep.div_j = divergence(j, sig);
    rep.theta = std::move(theta);
    rep.rho = std::move(rho);
    rep.j = std::move(j);
    rep.reference_defect = R.residual;
    return rep;
  }

  ReferenceSolver& reference() { return ref_; }
  const GridPtr& grid() { return ref_.weyl().grid(); }

 private:
  ReferenceSolver ref_;
};

inline EnergyReport wang_yau_energy(const SurfaceDataset& data, const ScalarField& tau,
                                    const WeylOptions& opt = energy_options()) {
  EnergyEvaluator ev(data.sigma.grid(), opt);
  return ev.evaluate(data, tau);
}

}  // namespace qlm
