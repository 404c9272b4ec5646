#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qlm {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Gauss-Legendre nodes and weights on (-1,1), by Newton iteration on P_n.
inline void gauss_legendre(int n, ArrayXd& x, ArrayXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double xi = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // evaluate P_n and P_n' at xi
      double p0 = 1.0, p1 = xi;
      for (int l = 2; l <= n; ++l) {
        double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = -xi;
    x[n - 1 - i] = xi;
    double wi = 2.0 / ((1.0 - xi * xi) * dp * dp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
}

/// Collocation grid on S^2: Gauss-Legendre colatitudes x uniform longitudes,
/// with real spherical-harmonic transforms and exact nodal evaluation of
/// coordinate derivatives (up to third order) of band-limited scalars.
///
/// Real basis, orthonormal on the unit sphere:
///   Y_{l,0}  = Pbar_{l,0}(cos th)
///   Y_{l,m}  = sqrt(2) Pbar_{l,m}(cos th) cos(m ph),  m > 0
///   Y_{l,-m} = sqrt(2) Pbar_{l,m}(cos th) sin(m ph),  m > 0
/// Coefficient layout: idx(l,m) = l*l + l + m.
class SphereGrid {
 public:
  static std::shared_ptr<const SphereGrid> make(int lmax) {
    return std::shared_ptr<const SphereGrid>(new SphereGrid(lmax));
  }

  int lmax() const { return lmax_; }
  int nlat() const { return nlat_; }
  int nlon() const { return nlon_; }
  int nnodes() const { return nlat_ * nlon_; }
  int ncoeff() const { return (lmax_ + 1) * (lmax_ + 1); }
  static int index(int l, int m) { return l * l + l + m; }

  // node q = i*nlon + j
  const ArrayXd& theta() const { return theta_; }         // size nlat
  const ArrayXd& phi() const { return phi_; }             // size nlon
  const ArrayXd& node_theta() const { return node_th_; }  // size nnodes
  const ArrayXd& node_phi() const { return node_ph_; }
  const ArrayXd& node_sin_theta() const { return node_sth_; }
  const ArrayXd& node_cos_theta() const { return node_cth_; }
  /// Quadrature weights: sum_q w_q f(q) = int_{S^2} f dOmega for band-limited f.
  const ArrayXd& node_weight() const { return node_w_; }

  /// Projection onto the real SH basis (exact for bandwidth <= lmax).
  VectorXd analysis(const ArrayXd& values) const {
    if (values.size() != nnodes())
      throw std::invalid_argument("SphereGrid::analysis: size mismatch");
    Eigen::Map<const MatrixXd> F(values.data(), nlon_, nlat_);
    // A(i,m) = sum_j f(i,j) cos(m ph_j), B likewise with sin.
    MatrixXd A = (F.transpose() * cosm_);  // nlat x (lmax+1)
    MatrixXd B = (F.transpose() * sinm_);
    VectorXd c(ncoeff());
    const double dphi = 2.0 * kPi / nlon_;
    for (int m = 0; m <= lmax_; ++m) {
      const MatrixXd& P = ptab_[0][m];
      const double fac = (m == 0 ? 1.0 : std::sqrt(2.0)) * dphi;
      for (int l = m; l <= lmax_; ++l) {
        double cc = 0.0, cs = 0.0;
        for (int i = 0; i < nlat_; ++i) {
          const double t = glw_(i) * P(i, l - m);
          cc += t * A(i, m);
          if (m > 0) cs += t * B(i, m);
        }
        c[index(l, m)] = fac * cc;
        if (m > 0) c[index(l, -m)] = fac * cs;
      }
    }
    return c;
  }

  /// Evaluate d^dth/dtheta^dth d^dph/dphi^dph of the band-limited field with
  /// the given coefficients, at all nodes. Exact at the interior nodes.
  ArrayXd synth(const VectorXd& coeffs, int dth = 0, int dph = 0) const {
    if (coeffs.size() != ncoeff())
      throw std::invalid_argument("SphereGrid::synth: size mismatch");
    if (dth < 0 || dth > 3 || dph < 0 || dph > 3)
      throw std::invalid_argument("SphereGrid::synth: derivative order");
    MatrixXd alpha = MatrixXd::Zero(nlat_, lmax_ + 1);  // cos(m ph) part
    MatrixXd beta = MatrixXd::Zero(nlat_, lmax_ + 1);   // sin(m ph) part
    for (int m = 0; m <= lmax_; ++m) {
      const MatrixXd& P = ptab_[dth][m];
      const double fac = (m == 0 ? 1.0 : std::sqrt(2.0));
      for (int l = m; l <= lmax_; ++l) {
        double a = fac * coeffs[index(l, m)];
        double b = (m > 0) ? fac * coeffs[index(l, -m)] : 0.0;
        // apply d/dphi dph times: (a,b) -> (m b, -m a)
        for (int k = 0; k < dph; ++k) {
          double an = m * b, bn = -m * a;
          a = an;
          b = bn;
        }
        if (a != 0.0) alpha.col(m) += a * P.col(l - m);
        if (b != 0.0) beta.col(m) += b * P.col(l - m);
      }
    }
    MatrixXd V = cosm_ * alpha.transpose() + sinm_ * beta.transpose();  // nlon x nlat
    return Eigen::Map<const ArrayXd>(V.data(), nnodes());
  }

  /// Values of every basis function (with the given derivative orders) at
  /// every node; row = coefficient index, column = node. Cached.
  const MatrixXd& basis_values(int dth, int dph) const {
    if (dth < 0 || dth > 1 || dph < 0 || dph > 1 || (dth && dph))
      throw std::invalid_argument("SphereGrid::basis_values: unsupported order");
    int slot = dth ? 1 : (dph ? 2 : 0);
    std::call_once(basis_once_[slot], [&] {
      MatrixXd& M = basis_cache_[slot];
      M.resize(ncoeff(), nnodes());
      VectorXd e = VectorXd::Zero(ncoeff());
      for (int k = 0; k < ncoeff(); ++k) {
        e[k] = 1.0;
        M.row(k) = synth(e, dth, dph).matrix().transpose();
        e[k] = 0.0;
      }
    });
    return basis_cache_[slot];
  }

 private:
  explicit SphereGrid(int lmax) : lmax_(lmax) {
    if (lmax < 2) throw std::invalid_argument("SphereGrid: lmax must be >= 2");
    nlat_ = (3 * lmax) / 2 + 2;
    nlon_ = 2 * nlat_;
    ArrayXd x;
    gauss_legendre(nlat_, x, glw_);
    theta_ = x.unaryExpr([](double v) { return std::acos(v); }).reverse();
    glw_ = glw_.reverse().eval();
    phi_.resize(nlon_);
    for (int j = 0; j < nlon_; ++j) phi_[j] = 2.0 * kPi * j / nlon_;

    node_th_.resize(nnodes());
    node_ph_.resize(nnodes());
    node_w_.resize(nnodes());
    for (int i = 0; i < nlat_; ++i)
      for (int j = 0; j < nlon_; ++j) {
        int q = i * nlon_ + j;
        node_th_[q] = theta_[i];
        node_ph_[q] = phi_[j];
        node_w_[q] = glw_[i] * (2.0 * kPi / nlon_);
      }
    node_sth_ = node_th_.sin();
    node_cth_ = node_th_.cos();

    cosm_.resize(nlon_, lmax_ + 1);
    sinm_.resize(nlon_, lmax_ + 1);
    for (int j = 0; j < nlon_; ++j)
      for (int m = 0; m <= lmax_; ++m) {
        cosm_(j, m) = std::cos(m * phi_[j]);
        sinm_(j, m) = std::sin(m * phi_[j]);
      }

    build_legendre_tables();
  }

  void build_legendre_tables() {
    for (int d = 0; d < 4; ++d) ptab_[d].resize(lmax_ + 1);
    for (int m = 0; m <= lmax_; ++m)
      for (int d = 0; d < 4; ++d) ptab_[d][m].setZero(nlat_, lmax_ + 1 - m);

    for (int i = 0; i < nlat_; ++i) {
      const double c = std::cos(theta_[i]);
      const double s = std::sin(theta_[i]);
      // P0: normalized associated Legendre, no Condon-Shortley phase.
      std::vector<std::vector<double>> P(lmax_ + 1);
      for (int m = 0; m <= lmax_; ++m) P[m].assign(lmax_ + 1 - m, 0.0);
      P[0][0] = std::sqrt(1.0 / (4.0 * kPi));
      for (int m = 1; m <= lmax_; ++m)
        P[m][0] = s * std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * P[m - 1][0];
      for (int m = 0; m <= lmax_; ++m) {
        if (m + 1 <= lmax_) P[m][1] = std::sqrt(2.0 * m + 3.0) * c * P[m][0];
        for (int l = m + 2; l <= lmax_; ++l) {
          double a = std::sqrt(((2.0 * l + 1.0) * (2.0 * l - 1.0)) /
                               (double(l - m) * double(l + m)));
          double b = std::sqrt(((2.0 * l + 1.0) * (l - 1.0 - m) * (l - 1.0 + m)) /
                               ((2.0 * l - 3.0) * double(l - m) * double(l + m)));
          P[m][l - m] = a * c * P[m][l - m - 1] - b * P[m][l - m - 2];
        }
      }
      for (int m = 0; m <= lmax_; ++m)
        for (int l = m; l <= lmax_; ++l) {
          const double p = P[m][l - m];
          const double pm1 = (l > m) ? P[m][l - m - 1] : 0.0;
          const double dcoef =
              (l > m) ? std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) /
                                  (2.0 * l - 1.0))
                      : 0.0;
          const double p1 = (l * c * p - dcoef * pm1) / s;
          const double lam = double(l) * (l + 1.0) - double(m) * m / (s * s);
          const double p2 = -(c / s) * p1 - lam * p;
          const double p3 = (1.0 / (s * s)) * p1 - (c / s) * p2 - lam * p1 -
                            (2.0 * m * m * c / (s * s * s)) * p;
          ptab_[0][m](i, l - m) = p;
          ptab_[1][m](i, l - m) = p1;
          ptab_[2][m](i, l - m) = p2;
          ptab_[3][m](i, l - m) = p3;
        }
    }
  }

  int lmax_, nlat_, nlon_;
  ArrayXd theta_, phi_, glw_;
  ArrayXd node_th_, node_ph_, node_w_, node_sth_, node_cth_;
  MatrixXd cosm_, sinm_;
  std::vector<MatrixXd> ptab_[4];  // [dtheta order][m] -> nlat x (lmax+1-m)

  mutable std::once_flag basis_once_[3];
  mutable MatrixXd basis_cache_[3];
};

using GridPtr = std::shared_ptr<const SphereGrid>;

}  // namespace qlm
