#pragma once

#include "qlm/surfaces.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace qlm {

struct WeylOptions {
  double tol = 1e-9;          // relative sup-norm isometry defect
  int max_iter = 200;
  double levenberg = 1e-10;   // diagonal damping, relative to the max diagonal
  double gauge_weight = 1.0;  // rigid-motion penalty, relative to the mean diagonal
  int refresh_limit = 25;     // Gauss-Newton steps between normal-matrix rebuilds
};

struct WeylResult {
  SurfaceEmbedding embedding;
  double defect = 0.0;  // relative sup-norm isometry defect at exit
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // defect after each accepted step
};

/// Isometric embedding of a positive-curvature metric on S^2 into R^3.
///
/// Gauss-Newton on the spherical-harmonic coefficients of the position
/// functions, minimizing the quadrature-weighted L^2 defect of the induced
/// metric measured in the orthonormalized coordinate frame (d_theta,
/// d_phi/sin theta). The normal matrix is dense and expensive to form, so it
/// is factored once and reused across steps (and, optionally, across nearby
/// solves) until progress stalls; the gradient is always exact. The six
/// rigid-motion modes (translations, infinitesimal rotations) are null
/// directions of the defect and are penalized to keep the system definite;
/// the translation gauge is fixed by recentering the result.
class WeylSolver {
 public:
  explicit WeylSolver(GridPtr g, WeylOptions opt = {})
      : grid_(std::move(g)), opt_(opt), n_(grid_->nnodes()), nc_(grid_->ncoeff()) {
    const ArrayXd& s = grid_->node_sin_theta();
    fr_[0] = ArrayXd::Ones(n_);
    fr_[1] = 1.0 / s;
    fr_[2] = 1.0 / (s * s);
    const ArrayXd& w = grid_->node_weight();
    wk_[0] = w;
    wk_[1] = 2.0 * w;  // off-diagonal multiplicity
    wk_[2] = w;
  }

  const GridPtr& grid() const { return grid_; }
  const WeylOptions& options() const { return opt_; }

  /// Cold solve: round seed of matching area, then metric continuation from
  /// the round metric if the direct attempt stalls.
  WeylResult solve(const MetricField& target) {
    if (!target.convex())
      throw std::domain_error(
          "solve_weyl: target metric must have positive Gauss curvature (min K = " +
          std::to_string(target.min_gauss_curvature()) + ")");
    const double r = std::sqrt(target.area() / (4.0 * kPi));
    SurfaceEmbedding seed = SurfaceEmbedding::sphere(grid_, r);
    WeylResult res = solve_from(target, seed);
    if (res.converged) return res;
    // continuation from the round metric of equal area
    MetricField base = MetricField::round(grid_, r);
    SurfaceEmbedding cur = seed;
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
      TensorJet j = TensorJet::zero(n_);
      j.axpy(1.0 - t, base.jet());
      j.axpy(t, target.jet());
      res = solve_from(MetricField(grid_, std::move(j)), cur);
      if (!res.converged) break;
      cur = res.embedding;
    }
    return res;
  }

  /// Solve from an explicit seed. With reuse_normal, the factorization left
  /// by the previous solve is kept as the initial quasi-Newton matrix; it is
  /// rebuilt automatically if it stops producing descent.
  WeylResult solve_from(const MetricField& target, const SurfaceEmbedding& seed,
                        bool reuse_normal = false) {
    detail::check_same_grid(grid_, target.grid(), "WeylSolver");
    if (seed.ncomp() != 3)
      throw std::invalid_argument("WeylSolver: seed must be a 3-component embedding");
    VectorXd z(3 * nc_);
    for (int i = 0; i < 3; ++i) z.segment(i * nc_, nc_) = seed.coeffs[i];

    Eval e = evaluate(z, target);
    WeylResult res;
    res.history.push_back(e.defect);
    if (e.defect > opt_.tol && (!reuse_normal || !have_normal_)) {
      build_normal(e, z);
      since_build_ = 0;
    }
    for (int it = 0; it < opt_.max_iter && e.defect > opt_.tol; ++it) {
      VectorXd step = -llt_.solve(grad(e));
      double s = 1.0;
      bool ok = false;
      Eval trial;
      for (int ls = 0; ls < 30; ++ls) {
        trial = evaluate(z + s * step, target);
        if (trial.phi < e.phi) {
          ok = true;
          break;
        }
        s *= 0.5;
      }
      if (!ok) {
        if (since_build_ == 0) break;  // fresh matrix and still no descent
        build_normal(e, z);
        since_build_ = 0;
        continue;
      }
      z += s * step;
      e = std::move(trial);
      res.history.push_back(e.defect);
      res.iterations = it + 1;
      if (++since_build_ >= opt_.refresh_limit && e.defect > opt_.tol) {
        build_normal(e, z);
        since_build_ = 0;
      }
    }
    res.defect = e.defect;
    res.converged = e.defect <= opt_.tol;
    // translation gauge: center of mass at the origin
    for (int i = 0; i < 3; ++i) z[i * nc_] = 0.0;
    std::vector<VectorXd> c(3);
    for (int i = 0; i < 3; ++i) c[i] = z.segment(i * nc_, nc_);
    res.embedding = SurfaceEmbedding(grid_, std::move(c));
    return res;
  }

 private:
  struct Eval {
    std::array<ArrayXd, 3> Xt, Xp;  // d_theta X^i, d_phi X^i
    std::array<ArrayXd, 3> R;       // induced-metric residual components
    double phi = 0.0;               // weighted least-squares objective
    double defect = 0.0;            // relative sup-norm frame defect
  };

  Eval evaluate(const VectorXd& z, const MetricField& tgt) const {
    Eval e;
    for (int i = 0; i < 3; ++i) {
      VectorXd c = z.segment(i * nc_, nc_);
      e.Xt[i] = grid_->synth(c, 1, 0);
      e.Xp[i] = grid_->synth(c, 0, 1);
    }
    e.R[0] = e.Xt[0] * e.Xt[0] + e.Xt[1] * e.Xt[1] + e.Xt[2] * e.Xt[2] - tgt.g11();
    e.R[1] = e.Xt[0] * e.Xp[0] + e.Xt[1] * e.Xp[1] + e.Xt[2] * e.Xp[2] - tgt.g12();
    e.R[2] = e.Xp[0] * e.Xp[0] + e.Xp[1] * e.Xp[1] + e.Xp[2] * e.Xp[2] - tgt.g22();
    double scale = 0.0;
    const ArrayXd* tc[3] = {&tgt.g11(), &tgt.g12(), &tgt.g22()};
    for (int k = 0; k < 3; ++k) {
      ArrayXd rf = fr_[k] * e.R[k];
      e.phi += 0.5 * (wk_[k] * rf.square()).sum();
      e.defect = std::max(e.defect, rf.abs().maxCoeff());
      scale = std::max(scale, (fr_[k] * (*tc[k])).abs().maxCoeff());
    }
    e.defect /= scale;
    return e;
  }

  VectorXd grad(const Eval& e) const {
    std::array<ArrayXd, 3> s;
    for (int k = 0; k < 3; ++k) s[k] = wk_[k] * fr_[k].square() * e.R[k];
    const MatrixXd& Bt = grid_->basis_values(1, 0);
    const MatrixXd& Bp = grid_->basis_values(0, 1);
    VectorXd g(3 * nc_);
    for (int i = 0; i < 3; ++i) {
      ArrayXd a = 2.0 * s[0] * e.Xt[i] + s[1] * e.Xp[i];
      ArrayXd b = s[1] * e.Xt[i] + 2.0 * s[2] * e.Xp[i];
      g.segment(i * nc_, nc_) = Bt * a.matrix() + Bp * b.matrix();
    }
    return g;
  }

  void build_normal(const Eval& e, const VectorXd& z) {
    const MatrixXd& Bt = grid_->basis_values(1, 0);
    const MatrixXd& Bp = grid_->basis_values(0, 1);
    std::array<ArrayXd, 3> rw;
    for (int k = 0; k < 3; ++k) rw[k] = wk_[k].sqrt() * fr_[k];
    MatrixXd Jw(3 * n_, 3 * nc_);
    for (int i = 0; i < 3; ++i) {
      Jw.block(0, i * nc_, n_, nc_) =
          (Bt.transpose().array().colwise() * (rw[0] * 2.0 * e.Xt[i])).matrix();
      Jw.block(n_, i * nc_, n_, nc_) =
          (Bt.transpose().array().colwise() * (rw[1] * e.Xp[i]) +
           Bp.transpose().array().colwise() * (rw[1] * e.Xt[i]))
              .matrix();
      Jw.block(2 * n_, i * nc_, n_, nc_) =
          (Bp.transpose().array().colwise() * (rw[2] * 2.0 * e.Xp[i])).matrix();
    }
    MatrixXd N = MatrixXd::Zero(3 * nc_, 3 * nc_);
    N.selfadjointView<Eigen::Lower>().rankUpdate(Jw.transpose());
    N = N.selfadjointView<Eigen::Lower>();
    const double mean_diag = N.diagonal().mean();
    for (const VectorXd& v : gauge_basis(z))
      N.noalias() += (opt_.gauge_weight * mean_diag) * v * v.transpose();
    N.diagonal().array() += opt_.levenberg * N.diagonal().maxCoeff();
    llt_.compute(N);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("WeylSolver: normal-matrix factorization failed");
    have_normal_ = true;
  }

  /// Null directions of the defect: 3 translations and 3 infinitesimal
  /// rotations about the coordinate axes, linearized at z.
  std::vector<VectorXd> gauge_basis(const VectorXd& z) const {
    std::vector<VectorXd> out;
    for (int i = 0; i < 3; ++i) {
      VectorXd v = VectorXd::Zero(3 * nc_);
      v[i * nc_] = 1.0;  // Y_00 coefficient shifts the component i
      out.push_back(v);
    }
    auto rot = [&](int a, int b) {
      VectorXd v = VectorXd::Zero(3 * nc_);
      v.segment(a * nc_, nc_) = -z.segment(b * nc_, nc_);
      v.segment(b * nc_, nc_) = z.segment(a * nc_, nc_);
      double nrm = v.norm();
      if (nrm > 1e-12) {
        v /= nrm;
        out.push_back(v);
      }
    };
    rot(1, 2);  // about x
    rot(2, 0);  // about y
    rot(0, 1);  // about z
    return out;
  }

  GridPtr grid_;
  WeylOptions opt_;
  int n_, nc_;
  std::array<ArrayXd, 3> fr_, wk_;
  Eigen::LLT<MatrixXd> llt_;
  bool have_normal_ = false;
  int since_build_ = 0;
};

inline SurfaceEmbedding solve_weyl(const MetricField& metric,
                                   const SurfaceEmbedding* seed = nullptr,
                                   const WeylOptions& opt = {}) {
  WeylSolver solver(metric.grid(), opt);
  WeylResult r = seed ? solver.solve_from(metric, *seed) : solver.solve(metric);
  if (!r.converged) {
    std::ostringstream os;
    os << "solve_weyl: stalled at defect " << r.defect << " after " << r.iterations
       << " iterations; defect history:";
    for (size_t i = 0; i < r.history.size(); i += std::max<size_t>(1, r.history.size() / 8))
      os << " " << r.history[i];
    throw std::runtime_error(os.str());
  }
  return r.embedding;
}

/// Reference data for a pair (sigma, tau): the isometric embedding Xhat of
/// sigma_hat = sigma + dtau (x) dtau into R^3, its second fundamental form
/// and mean curvature, and the Minkowski data |H_0|, alpha_{H_0}, theta_0 of
/// the lifted surface X = (tau, Xhat) with observer T_0 = (1,0,0,0).
struct ReferenceGeometry {
  SurfaceEmbedding Xhat;
  MetricField sigma_hat;
  SymmetricTensorField hhat;
  ScalarField Hhat;
  ScalarField normH0;
  VectorField alphaH0;
  ScalarField theta0;
  double residual = 0.0;  // isometry defect of Xhat
};

/// Builds ReferenceGeometry instances; keeps the previous embedding and the
/// solver's factored normal matrix so that sequences of nearby (sigma, tau)
/// pairs (line searches, finite-difference probes) solve in a few cheap
/// quasi-Newton steps.
class ReferenceSolver {
 public:
  explicit ReferenceSolver(GridPtr g, WeylOptions opt = {})
      : solver_(std::move(g), opt) {}

  ReferenceGeometry build(const MetricField& sigma, const ScalarField& tau) {
    const GridPtr& g = solver_.grid();
    detail::check_same_grid(g, sigma.grid(), "reference_geometry");
    detail::check_same_grid(g, tau.grid, "reference_geometry");
    MetricField sigma_hat = sigma.add_dtau_dtau(tau);
    if (!sigma_hat.convex())
      throw std::domain_error(
          "reference_geometry: sigma + dtau dtau must have positive Gauss curvature "
          "(min K = " +
          std::to_string(sigma_hat.min_gauss_curvature()) + ")");
    WeylResult wr;
    if (warm_) {
      wr = solver_.solve_from(sigma_hat, last_, /*reuse_normal=*/true);
      if (!wr.converged) wr = solver_.solve(sigma_hat);
    } else {
      wr = solver_.solve(sigma_hat);
    }
    if (!wr.converged)
      throw std::runtime_error("reference_geometry: embedding solve stalled at defect " +
                               std::to_string(wr.defect));
    last_ = wr.embedding;
    warm_ = true;

    SliceGeometry geo = slice_geometry(wr.embedding, AmbientSpace::euclidean());
    std::vector<VectorXd> lift_coeffs;
    lift_coeffs.push_back(tau.coeffs());
    for (int i = 0; i < 3; ++i) lift_coeffs.push_back(wr.embedding.coeffs[i]);
    SpacetimeGeometry st = spacetime_geometry(SurfaceEmbedding(g, std::move(lift_coeffs)));

    VectorField dtau = gradient(tau, sigma);
    ArrayXd v2 = norm_squared(sigma, dtau);
    ArrayXd lap = laplace_beltrami(tau, sigma).v;
    ArrayXd arg = -lap / (st.normH.v * (1.0 + v2).sqrt());
    ScalarField theta0{g, arg.unaryExpr([](double x) { return std::asinh(x); })};

    return {std::move(wr.embedding), std::move(sigma_hat), std::move(geo.second_form),
            std::move(geo.mean_curvature), std::move(st.normH), std::move(st.alphaH),
            std::move(theta0), wr.defect};
  }

  void reset() { warm_ = false; }
  WeylSolver& weyl() { return solver_; }

 private:
  WeylSolver solver_;
  SurfaceEmbedding last_;
  bool warm_ = false;
};

inline ReferenceGeometry reference_geometry(const MetricField& sigma,
                                            const ScalarField& tau,
                                            const WeylOptions& opt = {}) {
  ReferenceSolver s(sigma.grid(), opt);
  return s.build(sigma, tau);
}

/// Pointwise residual of the first structural identity of the reference
/// geometry: sqrt(1+|grad tau|^2) Hhat = sqrt(1+|grad tau|^2) cosh(theta_0)
/// |H_0| - <grad tau, grad theta_0> - alpha_{H_0}(grad tau), all inner
/// products taken with sigma.
inline ScalarField reference_identity_a(const ReferenceGeometry& R,
                                        const MetricField& sigma,
                                        const ScalarField& tau) {
  VectorField dtau = gradient(tau, sigma);
  ArrayXd root = (1.0 + norm_squared(sigma, dtau)).sqrt();
  VectorField dtheta = gradient(R.theta0, sigma);
  ArrayXd rhs = root * R.theta0.v.cosh() * R.normH0.v - inner(sigma, dtau, dtheta) -
                inner(sigma, R.alphaH0, dtau);
  return {sigma.grid(), root * R.Hhat.v - rhs};
}

/// Pointwise residual of the second structural identity (the divergence
/// form): -(Hhat sigma_hat^{ab} - sigma_hat^{ac} sigma_hat^{bd} hhat_cd)
/// nabla_b nabla_a tau / sqrt(1+|grad tau|^2) + div_sigma(cosh(theta_0)|H_0|
/// grad tau / sqrt(1+|grad tau|^2) - grad theta_0 - alpha_{H_0}) = 0.
inline ScalarField reference_identity_b(const ReferenceGeometry& R,
                                        const MetricField& sigma,
                                        const ScalarField& tau) {
  const GridPtr& g = sigma.grid();
  VectorField dtau = gradient(tau, sigma);
  ArrayXd root = (1.0 + norm_squared(sigma, dtau)).sqrt();
  SymmetricTensorField hess = covariant_hessian(tau, sigma);
  ArrayXd first = -(R.Hhat.v * trace(R.sigma_hat, hess) -
                    tensor_dot(R.sigma_hat, R.hhat, hess)) /
                  root;
  ArrayXd f = R.theta0.v.cosh() * R.normH0.v / root;
  VectorField dtheta = gradient(R.theta0, sigma);
  VectorField V{g, f * dtau.c1 - dtheta.c1 - R.alphaH0.c1,
                f * dtau.c2 - dtheta.c2 - R.alphaH0.c2};
  return {g, first + divergence(V, sigma).v};
}

}  // namespace qlm
