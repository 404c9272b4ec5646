#pragma once

#include "qlm/fields.hpp"

namespace qlm {

/// All coordinate partials of a band-limited scalar up to third order,
/// evaluated exactly at the grid nodes.
struct ScalarJet3 {
  ArrayXd v, t, p, tt, tp, pp, ttt, ttp, tpp, ppp;

  static ScalarJet3 from_coeffs(const GridPtr& g, const VectorXd& c) {
    ScalarJet3 j;
    j.v = g->synth(c, 0, 0);
    j.t = g->synth(c, 1, 0);
    j.p = g->synth(c, 0, 1);
    j.tt = g->synth(c, 2, 0);
    j.tp = g->synth(c, 1, 1);
    j.pp = g->synth(c, 0, 2);
    j.ttt = g->synth(c, 3, 0);
    j.ttp = g->synth(c, 2, 1);
    j.tpp = g->synth(c, 1, 2);
    j.ppp = g->synth(c, 0, 3);
    return j;
  }
  static ScalarJet3 from_field(const ScalarField& f) {
    return from_coeffs(f.grid, f.coeffs());
  }
  // first partial: a in {0,1} = {theta, phi}
  const ArrayXd& d1(int a) const { return a == 0 ? t : p; }
  // second partial: k in {0,1,2} = {tt, tp, pp}
  const ArrayXd& d2(int k) const { return k == 0 ? tt : (k == 1 ? tp : pp); }
  // third partial d_a d_(k) with k a second-partial slot
  const ArrayXd& d3(int a, int k) const {
    static const int slot[2][3] = {{0, 1, 2}, {1, 2, 3}};
    switch (slot[a][k]) {
      case 0: return ttt;
      case 1: return ttp;
      case 2: return tpp;
      default: return ppp;
    }
  }
};

inline double integrate(const ScalarField& f, const MetricField& metric) {
  detail::check_same_grid(f.grid, metric.grid(), "integrate");
  return (f.v * metric.area_measure()).sum();
}

/// Differential of f as a one-form (covariant components).
inline VectorField gradient(const ScalarField& f, const MetricField& metric) {
  detail::check_same_grid(f.grid, metric.grid(), "gradient");
  VectorXd c = f.coeffs();
  return {f.grid, f.grid->synth(c, 1, 0), f.grid->synth(c, 0, 1)};
}

/// Contravariant components sigma^{ab} v_b.
inline std::pair<ArrayXd, ArrayXd> raise(const MetricField& m, const VectorField& v) {
  return {m.inv11() * v.c1 + m.inv12() * v.c2, m.inv12() * v.c1 + m.inv22() * v.c2};
}

/// sigma^{ab} v_a w_b at every node.
inline ArrayXd inner(const MetricField& m, const VectorField& v, const VectorField& w) {
  return m.inv11() * v.c1 * w.c1 + m.inv12() * (v.c1 * w.c2 + v.c2 * w.c1) +
         m.inv22() * v.c2 * w.c2;
}

inline ArrayXd norm_squared(const MetricField& m, const VectorField& v) {
  return inner(m, v, v);
}

/// Metric-compatible divergence of the raised vector:
/// div v = sqrt(sigma)^{-1} d_a ( sqrt(sigma) sigma^{ab} v_b ).
/// The phi-component density is expanded as sin(theta) * F^phi, which is a
/// smooth scalar on S^2; the bare component is not.
inline ScalarField divergence(const VectorField& v, const MetricField& metric) {
  detail::check_same_grid(v.grid, metric.grid(), "divergence");
  const GridPtr& g = v.grid;
  ArrayXd F1 = metric.sqrt_det() * (metric.inv11() * v.c1 + metric.inv12() * v.c2);
  ArrayXd S = g->node_sin_theta() * metric.sqrt_det() *
              (metric.inv12() * v.c1 + metric.inv22() * v.c2);
  ArrayXd dF1 = g->synth(g->analysis(F1), 1, 0);
  ArrayXd dS = g->synth(g->analysis(S), 0, 1);
  return {g, (dF1 + dS / g->node_sin_theta()) / metric.sqrt_det()};
}

/// nabla_a nabla_b f with respect to the Levi-Civita connection of metric.
inline SymmetricTensorField covariant_hessian(const ScalarField& f,
                                              const MetricField& metric) {
  detail::check_same_grid(f.grid, metric.grid(), "covariant_hessian");
  VectorXd c = f.coeffs();
  const GridPtr& g = f.grid;
  ArrayXd ft = g->synth(c, 1, 0), fp = g->synth(c, 0, 1);
  ArrayXd ftt = g->synth(c, 2, 0), ftp = g->synth(c, 1, 1), fpp = g->synth(c, 0, 2);
  const auto& G1 = metric.christoffel(0);
  const auto& G2 = metric.christoffel(1);
  return {g, ftt - G1[0] * ft - G2[0] * fp, ftp - G1[1] * ft - G2[1] * fp,
          fpp - G1[2] * ft - G2[2] * fp};
}

inline ScalarField laplace_beltrami(const ScalarField& f, const MetricField& metric) {
  SymmetricTensorField h = covariant_hessian(f, metric);
  return {f.grid,
          metric.inv11() * h.t11 + 2.0 * metric.inv12() * h.t12 + metric.inv22() * h.t22};
}

inline ScalarField gauss_curvature(const MetricField& metric) {
  return {metric.grid(), metric.gauss_curvature_values()};
}

/// sigma^{ab} t_ab.
inline ArrayXd trace(const MetricField& m, const SymmetricTensorField& t) {
  return m.inv11() * t.t11 + 2.0 * m.inv12() * t.t12 + m.inv22() * t.t22;
}

/// Full contraction m^{ac} m^{bd} A_ab B_cd of two symmetric 2-tensors.
inline ArrayXd tensor_dot(const MetricField& m, const SymmetricTensorField& A,
                          const SymmetricTensorField& B) {
  ArrayXd M11 = m.inv11() * A.t11 + m.inv12() * A.t12;
  ArrayXd M12 = m.inv11() * A.t12 + m.inv12() * A.t22;
  ArrayXd M21 = m.inv12() * A.t11 + m.inv22() * A.t12;
  ArrayXd M22 = m.inv12() * A.t12 + m.inv22() * A.t22;
  ArrayXd N11 = m.inv11() * B.t11 + m.inv12() * B.t12;
  ArrayXd N12 = m.inv11() * B.t12 + m.inv12() * B.t22;
  ArrayXd N21 = m.inv12() * B.t11 + m.inv22() * B.t12;
  ArrayXd N22 = m.inv12() * B.t12 + m.inv22() * B.t22;
  return M11 * N11 + M12 * N21 + M21 * N12 + M22 * N22;
}

/// t(V, V) for a raised vector given by contravariant components.
inline ArrayXd quadratic_form(const SymmetricTensorField& t, const ArrayXd& V1,
                              const ArrayXd& V2) {
  return t.t11 * V1 * V1 + 2.0 * t.t12 * V1 * V2 + t.t22 * V2 * V2;
}

inline MetricField MetricField::add_dtau_dtau(const ScalarField& tau) const {
  detail::check_same_grid(grid_, tau.grid, "add_dtau_dtau");
  ScalarJet3 T = ScalarJet3::from_field(tau);
  TensorJet j = jet_;

  // k = 0: tau_t^2
  j.comp[0] += T.t * T.t;
  j.d[0][0] += 2.0 * T.t * T.tt;
  j.d[0][1] += 2.0 * T.t * T.tp;
  j.dd[0][0] += 2.0 * (T.ttt * T.t + T.tt * T.tt);
  j.dd[0][1] += 2.0 * (T.ttp * T.t + T.tt * T.tp);
  j.dd[0][2] += 2.0 * (T.tpp * T.t + T.tp * T.tp);
  // k = 1: tau_t tau_p
  j.comp[1] += T.t * T.p;
  j.d[1][0] += T.tt * T.p + T.t * T.tp;
  j.d[1][1] += T.tp * T.p + T.t * T.pp;
  j.dd[1][0] += T.ttt * T.p + 2.0 * T.tt * T.tp + T.t * T.ttp;
  j.dd[1][1] += T.ttp * T.p + T.tt * T.pp + T.tp * T.tp + T.t * T.tpp;
  j.dd[1][2] += T.tpp * T.p + 2.0 * T.tp * T.pp + T.t * T.ppp;
  // k = 2: tau_p^2
  j.comp[2] += T.p * T.p;
  j.d[2][0] += 2.0 * T.p * T.tp;
  j.d[2][1] += 2.0 * T.p * T.pp;
  j.dd[2][0] += 2.0 * (T.ttp * T.p + T.tp * T.tp);
  j.dd[2][1] += 2.0 * (T.tpp * T.p + T.tp * T.pp);
  j.dd[2][2] += 2.0 * (T.ppp * T.p + T.pp * T.pp);

  return MetricField(grid_, std::move(j));
}

}  // namespace qlm
