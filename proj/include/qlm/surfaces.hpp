#pragma once

#include "qlm/ambient.hpp"
#include "qlm/calculus.hpp"

#include <optional>
#include <sstream>
#include <vector>

namespace qlm {

/// Parametric surface S^2 -> R^3 or R^{3,1}, components stored as
/// spherical-harmonic coefficients. For spacetime surfaces component 0 is
/// the time coordinate; signature (-+++).
struct SurfaceEmbedding {
  GridPtr grid;
  std::vector<VectorXd> coeffs;  // 3 (Riemannian slice) or 4 (spacetime)

  SurfaceEmbedding() = default;
  SurfaceEmbedding(GridPtr g, std::vector<VectorXd> c)
      : grid(std::move(g)), coeffs(std::move(c)) {
    if (coeffs.size() != 3 && coeffs.size() != 4)
      throw std::invalid_argument("SurfaceEmbedding: need 3 or 4 components");
  }
  int ncomp() const { return int(coeffs.size()); }
  bool spacetime() const { return ncomp() == 4; }

  ScalarField component(int k) const { return {grid, grid->synth(coeffs[k])}; }
  ScalarJet3 jet(int k) const { return ScalarJet3::from_coeffs(grid, coeffs[k]); }

  /// Time function tau = -X . T0 for T0 = (1,0,0,0): the t-component.
  ScalarField time_function() const {
    if (!spacetime())
      throw std::invalid_argument("time_function: embedding is not a spacetime surface");
    return component(0);
  }

  static SurfaceEmbedding from_fields(const std::vector<ScalarField>& comps) {
    std::vector<VectorXd> c;
    for (const auto& f : comps) c.push_back(f.coeffs());
    return {comps.front().grid, std::move(c)};
  }

  /// Round sphere of radius r; in the t = 0 Minkowski slice when spacetime.
  static SurfaceEmbedding sphere(const GridPtr& g, double r, bool spacetime = false) {
    std::vector<ScalarField> c;
    if (spacetime) c.push_back(ScalarField::zero(g));
    const ArrayXd& st = g->node_sin_theta();
    c.emplace_back(g, r * st * g->node_phi().cos());
    c.emplace_back(g, r * st * g->node_phi().sin());
    c.emplace_back(g, r * g->node_cos_theta());
    return from_fields(c);
  }

  static SurfaceEmbedding ellipsoid(const GridPtr& g, double a, double b, double c,
                                    bool spacetime = false) {
    std::vector<ScalarField> comps;
    if (spacetime) comps.push_back(ScalarField::zero(g));
    const ArrayXd& st = g->node_sin_theta();
    comps.emplace_back(g, a * st * g->node_phi().cos());
    comps.emplace_back(g, b * st * g->node_phi().sin());
    comps.emplace_back(g, c * g->node_cos_theta());
    return from_fields(comps);
  }

  /// Graph over the sphere: t = height(n), x = r n.
  static SurfaceEmbedding graph_sphere(const GridPtr& g, double r,
                                       const ScalarField& height) {
    SurfaceEmbedding s = sphere(g, r, true);
    s.coeffs[0] = height.coeffs();
    return s;
  }

  /// Lorentz boost with rapidity beta along the z axis applied in place.
  SurfaceEmbedding boosted_z(double beta) const {
    if (!spacetime()) throw std::invalid_argument("boosted_z: not a spacetime surface");
    SurfaceEmbedding out = *this;
    const double ch = std::cosh(beta), sh = std::sinh(beta);
    out.coeffs[0] = ch * coeffs[0] + sh * coeffs[3];
    out.coeffs[3] = sh * coeffs[0] + ch * coeffs[3];
    return out;
  }

  SurfaceEmbedding scaled(double lambda) const {
    SurfaceEmbedding out = *this;
    for (auto& c : out.coeffs) c *= lambda;
    return out;
  }

  SurfaceEmbedding translated(const std::vector<double>& delta) const {
    if (int(delta.size()) != ncomp())
      throw std::invalid_argument("translated: dimension mismatch");
    SurfaceEmbedding out = *this;
    const double y00 = std::sqrt(4.0 * kPi);  // Y_00 = 1/sqrt(4pi)
    for (int k = 0; k < ncomp(); ++k) out.coeffs[k][0] += delta[k] * y00;
    return out;
  }

  /// Rotation about the z axis by angle a (acts on the spatial components).
  SurfaceEmbedding rotated_z(double a) const {
    SurfaceEmbedding out = *this;
    int ox = spacetime() ? 1 : 0;
    out.coeffs[ox] = std::cos(a) * coeffs[ox] - std::sin(a) * coeffs[ox + 1];
    out.coeffs[ox + 1] = std::sin(a) * coeffs[ox] + std::cos(a) * coeffs[ox + 1];
    return out;
  }
};

/// The Wang-Yau physical data (sigma, |H|, alpha_H) plus auxiliaries.
struct SurfaceDataset {
  MetricField sigma;
  ScalarField normH;   // |H|, norm of the mean curvature vector
  VectorField alphaH;  // connection one-form in the mean curvature gauge
  std::optional<ScalarField> meanH;  // scalar mean curvature within a hypersurface
  std::optional<ScalarField> gaussK;
  std::string provenance;
};

namespace detail {

/// Per-component 3-jets of an embedding, cached as arrays.
struct EmbeddingJets {
  std::vector<ScalarJet3> J;
  explicit EmbeddingJets(const SurfaceEmbedding& e) {
    for (int k = 0; k < e.ncomp(); ++k) J.push_back(e.jet(k));
  }
};

// second-partial slot pairs: slot k -> (a,b)
inline constexpr int kSlotA[3] = {0, 0, 1};
inline constexpr int kSlotB[3] = {0, 1, 1};
inline int slot_of(int a, int b) { return a + b; }  // (0,0)->0 (0,1)/(1,0)->1 (1,1)->2

/// Induced-metric 2-jet for a flat ambient with diagonal signature `eta`.
inline TensorJet induced_jet_flat(const EmbeddingJets& E, const std::vector<double>& eta) {
  const int n = E.J[0].v.size();
  const int nc = int(E.J.size());
  TensorJet j = TensorJet::zero(n);
  for (int k = 0; k < 3; ++k) {
    const int a = kSlotA[k], b = kSlotB[k];
    for (int i = 0; i < nc; ++i) {
      const ScalarJet3& X = E.J[i];
      const double w = eta[i];
      j.comp[k] += w * X.d1(a) * X.d1(b);
      for (int c = 0; c < 2; ++c)
        j.d[k][c] += w * (X.d2(slot_of(a, c)) * X.d1(b) + X.d1(a) * X.d2(slot_of(b, c)));
      for (int s = 0; s < 3; ++s) {
        const int c = kSlotA[s], d = kSlotB[s];
        j.dd[k][s] += w * (X.d3(d, slot_of(a, c)) * X.d1(b) +
                           X.d2(slot_of(a, c)) * X.d2(slot_of(b, d)) +
                           X.d2(slot_of(a, d)) * X.d2(slot_of(b, c)) +
                           X.d1(a) * X.d3(d, slot_of(b, c)));
      }
    }
  }
  return j;
}

/// Induced-metric 2-jet for a curved Riemannian ambient (pointwise loops).
inline TensorJet induced_jet_curved(const EmbeddingJets& E, const AmbientSpace& amb,
                                    std::vector<AmbientSpace::MetricJet>& gjets) {
  const int n = E.J[0].v.size();
  TensorJet out = TensorJet::zero(n);
  gjets.resize(n);
  for (int q = 0; q < n; ++q) {
    std::array<double, 3> x{E.J[0].v[q], E.J[1].v[q], E.J[2].v[q]};
    gjets[q] = amb.metric_jet(x);
    const auto& G = gjets[q];
    // X-jet at node q
    double X1[3][2], X2[3][3], X3[3][2][3];
    for (int i = 0; i < 3; ++i) {
      for (int a = 0; a < 2; ++a) X1[i][a] = E.J[i].d1(a)[q];
      for (int s = 0; s < 3; ++s) X2[i][s] = E.J[i].d2(s)[q];
      for (int a = 0; a < 2; ++a)
        for (int s = 0; s < 3; ++s) X3[i][a][s] = E.J[i].d3(a, s)[q];
    }
    // G_ij,c = dg[k][i][j] X^k_c ; G_ij,cd adds ddg and X2 terms
    double G1[2][3][3], G2[3][3][3];
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 3; ++i)
        for (int jj = 0; jj < 3; ++jj) {
          double t = 0;
          for (int k = 0; k < 3; ++k) t += G.dg[k][i][jj] * X1[k][c];
          G1[c][i][jj] = t;
        }
    for (int s = 0; s < 3; ++s) {
      const int c = kSlotA[s], d = kSlotB[s];
      for (int i = 0; i < 3; ++i)
        for (int jj = 0; jj < 3; ++jj) {
          double t = 0;
          for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l)
              t += G.ddg[l][k][i][jj] * X1[k][c] * X1[l][d];
            t += G.dg[k][i][jj] * X2[k][s];
          }
          G2[s][i][jj] = t;
        }
    }
    for (int kk = 0; kk < 3; ++kk) {
      const int a = kSlotA[kk], b = kSlotB[kk];
      double v = 0;
      for (int i = 0; i < 3; ++i)
        for (int jj = 0; jj < 3; ++jj) v += G.g[i][jj] * X1[i][a] * X1[jj][b];
      out.comp[kk][q] = v;
      for (int c = 0; c < 2; ++c) {
        double t = 0;
        for (int i = 0; i < 3; ++i)
          for (int jj = 0; jj < 3; ++jj)
            t += G1[c][i][jj] * X1[i][a] * X1[jj][b] +
                 G.g[i][jj] * (X2[i][slot_of(a, c)] * X1[jj][b] +
                               X1[i][a] * X2[jj][slot_of(b, c)]);
        out.d[kk][c][q] = t;
      }
      for (int s = 0; s < 3; ++s) {
        const int c = kSlotA[s], d = kSlotB[s];
        double t = 0;
        for (int i = 0; i < 3; ++i)
          for (int jj = 0; jj < 3; ++jj) {
            t += G2[s][i][jj] * X1[i][a] * X1[jj][b];
            t += G1[c][i][jj] * (X2[i][slot_of(a, d)] * X1[jj][b] +
                                 X1[i][a] * X2[jj][slot_of(b, d)]);
            t += G1[d][i][jj] * (X2[i][slot_of(a, c)] * X1[jj][b] +
                                 X1[i][a] * X2[jj][slot_of(b, c)]);
            t += G.g[i][jj] *
                 (X3[i][d][slot_of(a, c)] * X1[jj][b] +
                  X2[i][slot_of(a, c)] * X2[jj][slot_of(b, d)] +
                  X2[i][slot_of(a, d)] * X2[jj][slot_of(b, c)] +
                  X1[i][a] * X3[jj][d][slot_of(b, c)]);
          }
        out.dd[kk][s][q] = t;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Full first/second fundamental form data of a surface in a Riemannian slice.
struct SliceGeometry {
  MetricField sigma;
  SymmetricTensorField second_form;  // II_ab w.r.t. the outward unit normal
  ScalarField mean_curvature;        // sigma^{ab} II_ab
  std::array<ArrayXd, 3> normal;     // outward unit normal nu^i
};

inline SliceGeometry slice_geometry(const SurfaceEmbedding& emb, const AmbientSpace& amb) {
  if (emb.spacetime())
    throw std::invalid_argument("slice_geometry: expected a 3-component embedding");
  if (!amb.riemannian())
    throw std::invalid_argument("slice_geometry: ambient space must be Riemannian");
  const GridPtr& g = emb.grid;
  const int n = g->nnodes();
  detail::EmbeddingJets E(emb);
  std::vector<AmbientSpace::MetricJet> gj;
  TensorJet jet = detail::induced_jet_curved(E, amb, gj);
  MetricField sigma(g, std::move(jet));

  ArrayXd nu[3], II[3];
  for (auto& a : nu) a.resize(n);
  for (auto& a : II) a.resize(n);
  // centroid for outward orientation
  double cx[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) cx[i] = (E.J[i].v * g->node_weight()).sum() / (4.0 * kPi);

  for (int q = 0; q < n; ++q) {
    const auto& G = gj[q];
    double t1[3], t2[3];
    for (int i = 0; i < 3; ++i) {
      t1[i] = E.J[i].t[q];
      t2[i] = E.J[i].p[q];
    }
    // covector orthogonal to both tangents, then raise and normalize
    double nt[3] = {t1[1] * t2[2] - t1[2] * t2[1], t1[2] * t2[0] - t1[0] * t2[2],
                    t1[0] * t2[1] - t1[1] * t2[0]};
    // inverse metric at q
    double det = G.g[0][0] * (G.g[1][1] * G.g[2][2] - G.g[1][2] * G.g[2][1]) -
                 G.g[0][1] * (G.g[1][0] * G.g[2][2] - G.g[1][2] * G.g[2][0]) +
                 G.g[0][2] * (G.g[1][0] * G.g[2][1] - G.g[1][1] * G.g[2][0]);
    double gi[3][3];
    gi[0][0] = (G.g[1][1] * G.g[2][2] - G.g[1][2] * G.g[2][1]) / det;
    gi[0][1] = (G.g[0][2] * G.g[2][1] - G.g[0][1] * G.g[2][2]) / det;
    gi[0][2] = (G.g[0][1] * G.g[1][2] - G.g[0][2] * G.g[1][1]) / det;
    gi[1][0] = gi[0][1];
    gi[1][1] = (G.g[0][0] * G.g[2][2] - G.g[0][2] * G.g[2][0]) / det;
    gi[1][2] = (G.g[0][2] * G.g[1][0] - G.g[0][0] * G.g[1][2]) / det;
    gi[2][0] = gi[0][2];
    gi[2][1] = gi[1][2];
    gi[2][2] = (G.g[0][0] * G.g[1][1] - G.g[0][1] * G.g[1][0]) / det;
    double v[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v[i] += gi[i][j] * nt[j];
    double nn = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) nn += G.g[i][j] * v[i] * v[j];
    double s = 1.0 / std::sqrt(nn);
    double dot = 0;
    for (int i = 0; i < 3; ++i) dot += v[i] * (E.J[i].v[q] - cx[i]);
    if (dot < 0) s = -s;
    for (int i = 0; i < 3; ++i) nu[i][q] = s * v[i];

    // ambient Christoffels Gamma^i_kl = g^{ij}(dg_jk,l + dg_jl,k - dg_kl,j)/2
    double Gam[3][3][3];
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double t = 0;
          for (int j = 0; j < 3; ++j)
            t += gi[i][j] * (G.dg[l][j][k] + G.dg[k][j][l] - G.dg[j][k][l]);
          Gam[i][k][l] = 0.5 * t;
        }
    double T[2][3] = {{t1[0], t1[1], t1[2]}, {t2[0], t2[1], t2[2]}};
    for (int slot = 0; slot < 3; ++slot) {
      const int a = detail::kSlotA[slot], b = detail::kSlotB[slot];
      double acc = 0;
      for (int j = 0; j < 3; ++j) {
        double dd = E.J[j].d2(slot)[q];
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) dd += Gam[j][k][l] * T[a][k] * T[b][l];
        double cov = 0;
        for (int i = 0; i < 3; ++i) cov += G.g[i][j] * nu[i][q];
        acc += cov * dd;
      }
      // II_ab = <nabla_a nu, d_b X> = -<nu, nabla_a d_b X>; positive for the
      // round sphere with the outward normal
      II[slot][q] = -acc;
    }
  }
  SymmetricTensorField h{g, II[0], II[1], II[2]};
  ScalarField H{g, sigma.inv11() * h.t11 + 2.0 * sigma.inv12() * h.t12 +
                       sigma.inv22() * h.t22};
  return {std::move(sigma), std::move(h), std::move(H), {nu[0], nu[1], nu[2]}};
}

/// Geometry of a spacelike surface in Minkowski space: induced metric,
/// mean curvature vector, |H|, and the connection one-form alpha_H.
struct SpacetimeGeometry {
  MetricField sigma;
  std::array<ArrayXd, 4> meanvec;  // mean curvature vector H^mu
  ScalarField normH;
  VectorField alphaH;
};

inline SpacetimeGeometry spacetime_geometry(const SurfaceEmbedding& emb) {
  if (!emb.spacetime())
    throw std::invalid_argument("spacetime_geometry: expected a 4-component embedding");
  const GridPtr& g = emb.grid;
  const int n = g->nnodes();
  detail::EmbeddingJets E(emb);
  const std::vector<double> eta{-1.0, 1.0, 1.0, 1.0};
  MetricField sigma(g, detail::induced_jet_flat(E, eta));

  // H^mu = sigma^{ab} (X^mu_ab - Gamma^c_ab X^mu_c)
  std::array<ArrayXd, 4> H;
  const auto& G1 = sigma.christoffel(0);
  const auto& G2 = sigma.christoffel(1);
  for (int k = 0; k < 4; ++k) {
    const ScalarJet3& X = E.J[k];
    ArrayXd h11 = X.tt - G1[0] * X.t - G2[0] * X.p;
    ArrayXd h12 = X.tp - G1[1] * X.t - G2[1] * X.p;
    ArrayXd h22 = X.pp - G1[2] * X.t - G2[2] * X.p;
    H[k] = sigma.inv11() * h11 + 2.0 * sigma.inv12() * h12 + sigma.inv22() * h22;
  }
  ArrayXd H2 = -H[0] * H[0] + H[1] * H[1] + H[2] * H[2] + H[3] * H[3];
  if (!(H2 > 0.0).all()) {
    int q;
    H2.minCoeff(&q);
    std::ostringstream os;
    os << "spacetime_geometry: mean curvature vector not spacelike at node (theta="
       << g->node_theta()[q] << ", phi=" << g->node_phi()[q] << "), <H,H> = " << H2[q];
    throw std::domain_error(os.str());
  }
  ArrayXd nH = H2.sqrt();

  // J: future timelike normal orthogonal to H with <J,J> = -|H|^2.
  // Start from the normal part of the coordinate time vector.
  ArrayXd tau_t(n), tau_p(n);
  tau_t = E.J[0].t;
  tau_p = E.J[0].p;
  std::array<ArrayXd, 4> U;
  // eta(e_0, X_a) = -X^0_a; tangential projection sigma^{ab} eta(e_0,X_a) X_b
  ArrayXd p1 = sigma.inv11() * tau_t + sigma.inv12() * tau_p;  // raised (-X^0_a) sign below
  ArrayXd p2 = sigma.inv12() * tau_t + sigma.inv22() * tau_p;
  for (int k = 0; k < 4; ++k) {
    U[k] = p1 * E.J[k].t + p2 * E.J[k].p;
    if (k == 0) U[k] += 1.0;
  }
  auto mdot = [](const std::array<ArrayXd, 4>& a, const std::array<ArrayXd, 4>& b) {
    return (-a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]).eval();
  };
  ArrayXd UH = mdot(U, H);
  std::array<ArrayXd, 4> W;
  for (int k = 0; k < 4; ++k) W[k] = U[k] - (UH / H2) * H[k];
  ArrayXd W2 = mdot(W, W);
  if (!(W2 < 0.0).all())
    throw std::domain_error("spacetime_geometry: normal bundle frame degenerate");
  ArrayXd scale = nH / (-W2).sqrt();
  std::array<ArrayXd, 4> Jn;  // J / |H|
  for (int k = 0; k < 4; ++k) Jn[k] = scale * W[k] / nH;
  // future pointing: time component positive
  if ((Jn[0] <= 0.0).any())
    throw std::domain_error("spacetime_geometry: J fails to be future pointing");

  // alpha_H(d_a) = eta( d_a (J/|H|), H/|H| )
  ArrayXd a1 = ArrayXd::Zero(n), a2 = ArrayXd::Zero(n);
  for (int k = 0; k < 4; ++k) {
    VectorXd c = g->analysis(Jn[k]);
    ArrayXd dt = g->synth(c, 1, 0), dp = g->synth(c, 0, 1);
    const double w = (k == 0 ? -1.0 : 1.0);
    a1 += w * dt * H[k] / nH;
    a2 += w * dp * H[k] / nH;
  }
  return {std::move(sigma), std::move(H), ScalarField{g, nH}, VectorField{g, a1, a2}};
}

/// Wang-Yau data of a spacelike surface in Minkowski space.
inline SurfaceDataset induced_data_spacetime(const SurfaceEmbedding& emb) {
  SpacetimeGeometry geo = spacetime_geometry(emb);
  ScalarField K = gauss_curvature(geo.sigma);
  return {std::move(geo.sigma), std::move(geo.normH), std::move(geo.alphaH),
          std::nullopt, std::move(K), "minkowski embedding"};
}

/// Wang-Yau data of a surface in a time-symmetric Riemannian slice:
/// |H| equals the scalar mean curvature and alpha_H vanishes.
inline SurfaceDataset induced_data_slice(const SurfaceEmbedding& emb,
                                         const AmbientSpace& space) {
  SliceGeometry geo = slice_geometry(emb, space);
  if (!(geo.mean_curvature.v > 0.0).all()) {
    int q;
    geo.mean_curvature.v.minCoeff(&q);
    std::ostringstream os;
    os << "induced_data_slice: mean curvature not positive at node (theta="
       << emb.grid->node_theta()[q] << ", phi=" << emb.grid->node_phi()[q] << ")";
    throw std::domain_error(os.str());
  }
  ScalarField K = gauss_curvature(geo.sigma);
  return {std::move(geo.sigma), geo.mean_curvature, VectorField::zero(emb.grid),
          geo.mean_curvature, std::move(K), "slice: " + space.name()};
}

/// Surface in the standard light cone of Minkowski space: X = (r(n), r(n) n).
inline SurfaceEmbedding lightcone_surface(const ScalarField& radius_profile) {
  if (!(radius_profile.v > 0.0).all())
    throw std::domain_error("lightcone_surface: radius profile must be positive");
  const GridPtr& g = radius_profile.grid;
  const ArrayXd& r = radius_profile.v;
  std::vector<ScalarField> comps;
  comps.push_back(radius_profile);
  const ArrayXd& st = g->node_sin_theta();
  comps.emplace_back(g, r * st * g->node_phi().cos());
  comps.emplace_back(g, r * st * g->node_phi().sin());
  comps.emplace_back(g, r * g->node_cos_theta());
  SurfaceEmbedding emb = SurfaceEmbedding::from_fields(comps);
  // spacelike check: the induced-metric constructor rejects degenerate profiles
  detail::EmbeddingJets E(emb);
  MetricField sigma(g, detail::induced_jet_flat(E, {-1.0, 1.0, 1.0, 1.0}));
  return emb;
}

}  // namespace qlm
