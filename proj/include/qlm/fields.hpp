#pragma once

#include "qlm/sphere_grid.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace qlm {

namespace detail {
inline void check_same_grid(const GridPtr& a, const GridPtr& b, const char* who) {
  if (a.get() != b.get())
    throw std::invalid_argument(std::string(who) + ": fields on different grids");
}
}  // namespace detail

/// Nodal samples of a smooth scalar on S^2.
struct ScalarField {
  GridPtr grid;
  ArrayXd v;

  ScalarField() = default;
  ScalarField(GridPtr g, ArrayXd values) : grid(std::move(g)), v(std::move(values)) {
    if (v.size() != grid->nnodes())
      throw std::invalid_argument("ScalarField: value count != node count");
  }
  static ScalarField zero(const GridPtr& g) { return {g, ArrayXd::Zero(g->nnodes())}; }
  static ScalarField constant(const GridPtr& g, double c) {
    return {g, ArrayXd::Constant(g->nnodes(), c)};
  }
  /// Single real harmonic Y_{l,m} (orthonormal basis).
  static ScalarField harmonic(const GridPtr& g, int l, int m, double amplitude = 1.0) {
    VectorXd c = VectorXd::Zero(g->ncoeff());
    c[SphereGrid::index(l, m)] = amplitude;
    return {g, g->synth(c)};
  }
  VectorXd coeffs() const { return grid->analysis(v); }
  bool all_finite() const { return v.isFinite().all(); }
};

/// Covariant components (one-form) in the (theta, phi) coordinate frame.
struct VectorField {
  GridPtr grid;
  ArrayXd c1, c2;  // v_theta, v_phi

  VectorField() = default;
  VectorField(GridPtr g, ArrayXd a, ArrayXd b)
      : grid(std::move(g)), c1(std::move(a)), c2(std::move(b)) {
    if (c1.size() != grid->nnodes() || c2.size() != grid->nnodes())
      throw std::invalid_argument("VectorField: value count != node count");
  }
  static VectorField zero(const GridPtr& g) {
    return {g, ArrayXd::Zero(g->nnodes()), ArrayXd::Zero(g->nnodes())};
  }
};

struct SymmetricTensorField {
  GridPtr grid;
  ArrayXd t11, t12, t22;  // t12 stored once: t_ab = t_ba exactly

  SymmetricTensorField() = default;
  SymmetricTensorField(GridPtr g, ArrayXd a, ArrayXd b, ArrayXd c)
      : grid(std::move(g)), t11(std::move(a)), t12(std::move(b)), t22(std::move(c)) {}
};

/// Component 2-jet of a symmetric 2-tensor: values, first and second
/// coordinate partials at every node. Suppliers compute the partials
/// analytically (through spectral derivatives of the smooth scalars the
/// tensor is built from), so no re-expansion of frame components is needed.
struct TensorJet {
  // comp index: 0 -> (1,1), 1 -> (1,2), 2 -> (2,2); partial index: 0 -> theta, 1 -> phi
  std::array<ArrayXd, 3> comp;
  std::array<std::array<ArrayXd, 2>, 3> d;
  std::array<std::array<ArrayXd, 3>, 3> dd;  // second partials: {tt, tp, pp}

  static TensorJet zero(int n) {
    TensorJet j;
    for (int k = 0; k < 3; ++k) {
      j.comp[k] = ArrayXd::Zero(n);
      for (int a = 0; a < 2; ++a) j.d[k][a] = ArrayXd::Zero(n);
      for (int a = 0; a < 3; ++a) j.dd[k][a] = ArrayXd::Zero(n);
    }
    return j;
  }
  TensorJet& axpy(double s, const TensorJet& o) {
    for (int k = 0; k < 3; ++k) {
      comp[k] += s * o.comp[k];
      for (int a = 0; a < 2; ++a) d[k][a] += s * o.d[k][a];
      for (int a = 0; a < 3; ++a) dd[k][a] += s * o.dd[k][a];
    }
    return *this;
  }
};

/// Positive-definite metric sigma_ab with derived inverse, Christoffel
/// symbols, Gauss curvature (Brioschi) and area element.
class MetricField {
 public:
  MetricField() = default;

  MetricField(GridPtr g, TensorJet jet) : grid_(std::move(g)), jet_(std::move(jet)) {
    derive();
  }

  static MetricField round(const GridPtr& g, double radius) {
    const int n = g->nnodes();
    TensorJet j = TensorJet::zero(n);
    const double r2 = radius * radius;
    const ArrayXd& s = g->node_sin_theta();
    const ArrayXd& c = g->node_cos_theta();
    j.comp[0] = ArrayXd::Constant(n, r2);
    j.comp[2] = r2 * s * s;
    j.d[2][0] = 2.0 * r2 * s * c;
    j.dd[2][0] = 2.0 * r2 * (c * c - s * s);
    return MetricField(g, std::move(j));
  }

  /// sigma + d tau (x) d tau, from this metric's jet and the scalar tau.
  MetricField add_dtau_dtau(const ScalarField& tau) const;  // defined in calculus.hpp

  const GridPtr& grid() const { return grid_; }
  const TensorJet& jet() const { return jet_; }
  const ArrayXd& g11() const { return jet_.comp[0]; }
  const ArrayXd& g12() const { return jet_.comp[1]; }
  const ArrayXd& g22() const { return jet_.comp[2]; }
  const ArrayXd& inv11() const { return inv11_; }
  const ArrayXd& inv12() const { return inv12_; }
  const ArrayXd& inv22() const { return inv22_; }
  const ArrayXd& det() const { return det_; }
  const ArrayXd& sqrt_det() const { return sqrtdet_; }
  /// Gamma^c_{ab}: christoffel(c)[k], k indexing (ab) as 11, 12, 22.
  const std::array<ArrayXd, 3>& christoffel(int upper) const { return gamma_[upper]; }
  const ArrayXd& gauss_curvature_values() const { return K_; }
  /// dSigma = area_measure()_q as quadrature weights: sum_q f_q mu_q = int f dSigma.
  const ArrayXd& area_measure() const { return mu_; }
  double area() const { return mu_.sum(); }

  bool positive_definite() const { return (jet_.comp[0] > 0.0).all() && (det_ > 0.0).all(); }
  bool convex() const { return (K_ > 0.0).all(); }
  double min_gauss_curvature() const { return K_.minCoeff(); }

 private:
  void derive() {
    const ArrayXd& E = jet_.comp[0];
    const ArrayXd& F = jet_.comp[1];
    const ArrayXd& G = jet_.comp[2];
    det_ = E * G - F * F;
    if (!((E > 0.0).all() && (det_ > 0.0).all()))
      throw std::domain_error("MetricField: metric is not positive definite");
    sqrtdet_ = det_.sqrt();
    inv11_ = G / det_;
    inv12_ = -F / det_;
    inv22_ = E / det_;
    mu_ = grid_->node_weight() * sqrtdet_ / grid_->node_sin_theta();

    const ArrayXd& Eu = jet_.d[0][0];
    const ArrayXd& Ev = jet_.d[0][1];
    const ArrayXd& Fu = jet_.d[1][0];
    const ArrayXd& Fv = jet_.d[1][1];
    const ArrayXd& Gu = jet_.d[2][0];
    const ArrayXd& Gv = jet_.d[2][1];

    // Gamma_{c,ab} = (d_a g_cb + d_b g_ca - d_c g_ab)/2, then raise c.
    ArrayXd G111 = 0.5 * Eu;
    ArrayXd G112 = 0.5 * Ev;
    ArrayXd G122 = Fv - 0.5 * Gu;
    ArrayXd G211 = Fu - 0.5 * Ev;
    ArrayXd G212 = 0.5 * Gu;
    ArrayXd G222 = 0.5 * Gv;
    gamma_[0][0] = inv11_ * G111 + inv12_ * G211;
    gamma_[0][1] = inv11_ * G112 + inv12_ * G212;
    gamma_[0][2] = inv11_ * G122 + inv12_ * G222;
    gamma_[1][0] = inv12_ * G111 + inv22_ * G211;
    gamma_[1][1] = inv12_ * G112 + inv22_ * G212;
    gamma_[1][2] = inv12_ * G122 + inv22_ * G222;

    // Brioschi formula for the Gauss curvature.
    const ArrayXd& Evv = jet_.dd[0][2];
    const ArrayXd& Fuv = jet_.dd[1][1];
    const ArrayXd& Guu = jet_.dd[2][0];
    ArrayXd a11 = -0.5 * Evv + Fuv - 0.5 * Guu;
    ArrayXd a12 = 0.5 * Eu;
    ArrayXd a13 = Fu - 0.5 * Ev;
    ArrayXd a21 = Fv - 0.5 * Gu;
    ArrayXd a31 = 0.5 * Gv;
    ArrayXd b12 = 0.5 * Ev;
    ArrayXd b13 = 0.5 * Gu;
    ArrayXd det1 = a11 * (E * G - F * F) - a12 * (a21 * G - F * a31) +
                   a13 * (a21 * F - E * a31);
    ArrayXd det2 = -b12 * (b12 * G - F * b13) + b13 * (b12 * F - E * b13);
    K_ = (det1 - det2) / (det_ * det_);
  }

  GridPtr grid_;
  TensorJet jet_;
  ArrayXd inv11_, inv12_, inv22_, det_, sqrtdet_, mu_, K_;
  std::array<std::array<ArrayXd, 3>, 2> gamma_;
};

}  // namespace qlm
