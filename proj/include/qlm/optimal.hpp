#pragma once

#include "qlm/masses.hpp"

#include <Eigen/Eigenvalues>

#include <functional>

namespace qlm {

/// Variational identity: d/ds E(tau + s f)|_0 = kVariationSign * (1/8 pi)
/// int f div_sigma j dSigma. The sign was fixed once against central
/// finite differences of E and is frozen by a regression test.
inline constexpr double kVariationSign = -1.0;

/// div_sigma j for the pair (data, tau); vanishes at critical points of the
/// energy (the optimal isometric embedding equation).
inline ScalarField oiee_residual(const SurfaceDataset& data, const ScalarField& tau,
                                 const WeylOptions& opt = energy_options()) {
  return wang_yau_energy(data, tau, opt).div_j;
}

namespace detail {

inline std::vector<int> harmonic_modes(int lband, bool include_constant) {
  std::vector<int> idx;
  for (int l = include_constant ? 0 : 1; l <= lband; ++l)
    for (int m = -l; m <= l; ++m) idx.push_back(SphereGrid::index(l, m));
  return idx;
}

}  // namespace detail

/// Quadratic form of the second variation around tau = 0 on data with
/// div alpha_H = 0:
///   (1/8 pi) int (Delta f)^2 / H + (H_0 - |H|) |grad f|^2 - hhat(grad f, grad f).
inline double second_variation_mtx(const SurfaceDataset& data, const ScalarField& f,
                                   const ReferenceGeometry& ref) {
  const MetricField& sig = data.sigma;
  ScalarField div_alpha = divergence(data.alphaH, sig);
  const double scale = data.normH.v.abs().maxCoeff();
  if (div_alpha.v.abs().maxCoeff() > 1e-8 * scale)
    throw std::domain_error(
        "second_variation_mtx: div alpha_H != 0, the quadratic form only applies at "
        "the symmetric critical point tau = 0");
  VectorField df = gradient(f, sig);
  auto [v1, v2] = raise(sig, df);
  ArrayXd lap = laplace_beltrami(f, sig).v;
  ArrayXd integrand = lap.square() / data.normH.v +
                      (ref.Hhat.v - data.normH.v) * norm_squared(sig, df) -
                      quadratic_form(ref.hhat, v1, v2);
  return (integrand * sig.area_measure()).sum() / (8.0 * kPi);
}

inline double second_variation_mtx(const SurfaceDataset& data, const ScalarField& f,
                                   const WeylOptions& opt = energy_options()) {
  ReferenceGeometry ref =
      reference_geometry(data.sigma, ScalarField::zero(data.sigma.grid()), opt);
  return second_variation_mtx(data, f, ref);
}

/// Numerical Hessian of E at tau0 over the real harmonics with l <=
/// basis_limit (constant mode included), by second central differences of
/// the energy. Failed probe evaluations shrink the step (1e-3, 1e-4, 1e-5)
/// before giving up. Symmetric by construction.
inline MatrixXd hessian_numeric(const SurfaceDataset& data, const ScalarField& tau0,
                                int basis_limit,
                                const WeylOptions& opt = energy_options(),
                                double step = 1e-3) {
  const GridPtr& g = data.sigma.grid();
  std::vector<int> modes = detail::harmonic_modes(basis_limit, true);
  const int M = int(modes.size());
  VectorXd c0 = tau0.coeffs();
  EnergyEvaluator ev(g, opt);
  auto energy_at = [&](const VectorXd& c) {
    return ev.evaluate(data, ScalarField{g, g->synth(c)}).value;
  };

  std::string last_error;
  for (double h : {step, step * 0.1, step * 0.01}) {
    try {
      MatrixXd Q(M, M);
      const double E0 = energy_at(c0);
      std::vector<double> Ep(M), Em(M);
      for (int i = 0; i < M; ++i) {
        VectorXd c = c0;
        c[modes[i]] += h;
        Ep[i] = energy_at(c);
        c[modes[i]] -= 2.0 * h;
        Em[i] = energy_at(c);
        Q(i, i) = (Ep[i] - 2.0 * E0 + Em[i]) / (h * h);
      }
      for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j) {
          VectorXd c = c0;
          c[modes[i]] += h;
          c[modes[j]] += h;
          const double epp = energy_at(c);
          c[modes[j]] -= 2.0 * h;
          const double epm = energy_at(c);
          c[modes[i]] -= 2.0 * h;
          const double emm = energy_at(c);
          c[modes[j]] += 2.0 * h;
          const double emp = energy_at(c);
          Q(i, j) = Q(j, i) = (epp - epm - emp + emm) / (4.0 * h * h);
        }
      return Q;
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw std::runtime_error("hessian_numeric: probe evaluations kept failing (" +
                           last_error + ")");
}

struct OptimalOptions {
  int lband = 4;               // harmonic band of the tau updates
  double residual_tol = 1e-8;  // sup norm of div_sigma j at convergence
  int max_iter = 30;
  double fd_step = 1e-4;       // step of the gradient-difference Hessian
  double kernel_threshold = 1e-5;  // |lambda| < thr * max -> zero mode
  WeylOptions weyl = energy_options();
};

struct CriticalPointReport {
  ScalarField tau_star;
  double energy = 0.0;
  double residual = 0.0;  // sup |div_sigma j| at tau_star
  VectorXd hessian_eigenvalues;  // ascending, over the update band
  int kernel_dim = 0;
  bool mean_curvature_dominance = false;  // |H_{tau*}| > |H| pointwise
  bool converged = false;
  std::vector<double> history;  // residual sup norm per iterate
};

/// Minimizes E over band-limited tau by a damped Newton iteration on the
/// harmonic coefficients. The gradient comes from div_sigma j (one energy
/// evaluation); the Hessian from central differences of the gradient. Near
/// Minkowski data the Hessian is singular along the observer directions
/// (restrictions of a_0 + a_i x_i), so small eigenvalues are excluded from
/// the Newton step; steepest descent is the fallback when the Newton
/// direction fails to descend.
inline CriticalPointReport solve_optimal(const SurfaceDataset& data,
                                         const ScalarField& tau_init,
                                         const OptimalOptions& opt = {}) {
  const GridPtr& g = data.sigma.grid();
  detail::check_same_grid(g, tau_init.grid, "solve_optimal");
  std::vector<int> modes = detail::harmonic_modes(opt.lband, false);
  const int M = int(modes.size());
  EnergyEvaluator ev(g, opt.weyl);
  const MatrixXd& B0 = g->basis_values(0, 0);
  const ArrayXd& mu = data.sigma.area_measure();

  VectorXd c = tau_init.coeffs();
  auto report_at = [&](const VectorXd& cc) {
    return ev.evaluate(data, ScalarField{g, g->synth(cc)});
  };
  auto mode_gradient = [&](const EnergyReport& rep) {
    VectorXd full = B0 * (rep.div_j.v * mu).matrix();
    VectorXd G(M);
    for (int i = 0; i < M; ++i) G[i] = kVariationSign / (8.0 * kPi) * full[modes[i]];
    return G;
  };

  CriticalPointReport out;
  EnergyReport rep = report_at(c);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  for (int it = 0; it < opt.max_iter; ++it) {
    out.residual = rep.div_j.v.abs().maxCoeff();
    out.history.push_back(out.residual);
    if (out.residual <= opt.residual_tol) {
      out.converged = true;
      break;
    }
    VectorXd G = mode_gradient(rep);
    // gradient-difference Hessian in the mode basis
    MatrixXd Hn(M, M);
    for (int i = 0; i < M; ++i) {
      VectorXd cp = c, cm = c;
      cp[modes[i]] += opt.fd_step;
      cm[modes[i]] -= opt.fd_step;
      Hn.col(i) = (mode_gradient(report_at(cp)) - mode_gradient(report_at(cm))) /
                  (2.0 * opt.fd_step);
    }
    Hn = 0.5 * (Hn + Hn.transpose()).eval();
    es.compute(Hn);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    VectorXd gb = es.eigenvectors().transpose() * G;
    VectorXd db = VectorXd::Zero(M);
    for (int i = 0; i < M; ++i) {
      const double lam = es.eigenvalues()[i];
      if (std::abs(lam) > opt.kernel_threshold * lmax) db[i] = -gb[i] / std::abs(lam);
    }
    VectorXd d = es.eigenvectors() * db;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) d = -G * (1.0 / std::max(lmax, 1e-12));  // fallback descent
      double s = 1.0;
      for (int ls = 0; ls < 12; ++ls) {
        VectorXd ct = c;
        for (int i = 0; i < M; ++i) ct[modes[i]] += s * d[i];
        try {
          EnergyReport trial = report_at(ct);
          if (trial.value < rep.value ||
              trial.div_j.v.abs().maxCoeff() < out.residual) {
            c = ct;
            rep = std::move(trial);
            accepted = true;
            break;
          }
        } catch (const std::exception&) {
          // left the admissible region; shorten the step
        }
        s *= 0.5;
      }
    }
    if (!accepted) break;  // stall
  }
  out.residual = rep.div_j.v.abs().maxCoeff();
  if (out.history.empty() || out.history.back() != out.residual)
    out.history.push_back(out.residual);
  out.converged = out.residual <= opt.residual_tol;
  out.energy = rep.value;
  out.tau_star = ScalarField{g, g->synth(c)};

  // spectrum of the final gradient-difference Hessian, for the report
  MatrixXd Hn(M, M);
  for (int i = 0; i < M; ++i) {
    VectorXd cp = c, cm = c;
    cp[modes[i]] += opt.fd_step;
    cm[modes[i]] -= opt.fd_step;
    Hn.col(i) = (mode_gradient(report_at(cp)) - mode_gradient(report_at(cm))) /
                (2.0 * opt.fd_step);
  }
  Hn = 0.5 * (Hn + Hn.transpose()).eval();
  es.compute(Hn);
  out.hessian_eigenvalues = es.eigenvalues();
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  for (int i = 0; i < M; ++i)
    if (std::abs(es.eigenvalues()[i]) < opt.kernel_threshold * lmax) ++out.kernel_dim;

  ReferenceGeometry R = ev.reference().build(data.sigma, out.tau_star);
  out.mean_curvature_dominance = (R.normH0.v > data.normH.v).all();
  return out;
}

struct ComparisonResult {
  double E_tau = 0.0;    // E(Sigma, tau)
  double E_tau0 = 0.0;   // E(Sigma, tau0)
  double E_image = 0.0;  // E(Sigma_{tau0}, tau), image surface as physical data
};

/// Evaluates the three energies of the comparison inequality
/// E(Sigma, tau) >= E(Sigma, tau0) + E(Sigma_{tau0}, tau). The image surface
/// Sigma_{tau0} carries the data (sigma, |H_{tau0}|, alpha_{H_{tau0}}).
/// Hypotheses |H_{tau0}| > |H| > 0 and K(sigma + dtau dtau) > 0 are checked.
inline ComparisonResult comparison_check(const SurfaceDataset& data,
                                         const ScalarField& tau0,
                                         const ScalarField& tau,
                                         const WeylOptions& opt = energy_options()) {
  const GridPtr& g = data.sigma.grid();
  if (!(data.normH.v > 0.0).all())
    throw std::domain_error("comparison_check: hypothesis |H| > 0 fails");
  EnergyEvaluator ev(g, opt);
  ReferenceGeometry R0 = ev.reference().build(data.sigma, tau0);
  if (!(R0.normH0.v > data.normH.v).all())
    throw std::domain_error("comparison_check: hypothesis |H_tau0| > |H| fails");
  ComparisonResult out;
  out.E_tau0 = ev.evaluate_with(data, tau0, R0).value;
  out.E_tau = ev.evaluate(data, tau).value;  // K(sigma_hat) checked inside
  SurfaceDataset image{data.sigma, R0.normH0, R0.alphaH0,
                       std::nullopt,          std::nullopt, "image surface"};
  EnergyEvaluator ev2(g, opt);
  out.E_image = ev2.evaluate(image, tau).value;
  return out;
}

}  // namespace qlm
