#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qlm {

enum class AmbientTag { Minkowski, Euclidean, SchwarzschildSlice };

/// Riemannian slice metric g_ij in Cartesian coordinates, with analytic
/// first and second derivatives. The Schwarzschild spatial slice uses the
/// areal radial coordinate, g = (1-2m/r)^-1 dr^2 + r^2 dOmega^2, written as
/// g_ij = delta_ij + A(r) x_i x_j with A = 2m / (r^2 (r - 2m)); exterior only.
struct AmbientSpace {
  AmbientTag tag = AmbientTag::Euclidean;
  double mass = 0.0;

  static AmbientSpace minkowski() { return {AmbientTag::Minkowski, 0.0}; }
  static AmbientSpace euclidean() { return {AmbientTag::Euclidean, 0.0}; }
  static AmbientSpace schwarzschild_slice(double m) {
    if (m <= 0.0) throw std::invalid_argument("schwarzschild_slice: mass must be > 0");
    return {AmbientTag::SchwarzschildSlice, m};
  }

  bool riemannian() const { return tag != AmbientTag::Minkowski; }

  struct MetricJet {
    std::array<std::array<double, 3>, 3> g;
    std::array<std::array<std::array<double, 3>, 3>, 3> dg;    // dg[k][i][j]
    std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> ddg;  // ddg[l][k][i][j]
  };

  MetricJet metric_jet(const std::array<double, 3>& x) const {
    MetricJet out{};
    for (int i = 0; i < 3; ++i) out.g[i][i] = 1.0;
    if (tag != AmbientTag::SchwarzschildSlice) return out;

    const double m = mass;
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double r = std::sqrt(r2);
    if (r <= 2.0 * m)
      throw std::domain_error("SchwarzschildSlice: surface touches r <= 2m");
    // A(r) = 2m / (r^2 (r-2m)); dA/dr, d2A/dr2 analytic
    const double d = r - 2.0 * m;
    const double A = 2.0 * m / (r2 * d);
    const double Ap = -2.0 * m * (3.0 * r - 4.0 * m) / (r2 * r * d * d);
    const double App =
        4.0 * m * (6.0 * r2 - 16.0 * m * r + 12.0 * m * m) / (r2 * r2 * d * d * d);

    std::array<double, 3> rd;  // dr/dx_k
    for (int k = 0; k < 3; ++k) rd[k] = x[k] / r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.g[i][j] += A * x[i] * x[j];
    auto del = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          out.dg[k][i][j] =
              Ap * rd[k] * x[i] * x[j] + A * (del(i, k) * x[j] + del(j, k) * x[i]);
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k) {
        const double rkl = del(k, l) / r - x[k] * x[l] / (r2 * r);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            double t = (App * rd[k] * rd[l] + Ap * rkl) * x[i] * x[j];
            t += Ap * rd[k] * (del(i, l) * x[j] + del(j, l) * x[i]);
            t += Ap * rd[l] * (del(i, k) * x[j] + del(j, k) * x[i]);
            t += A * (del(i, k) * del(j, l) + del(j, k) * del(i, l));
            out.ddg[l][k][i][j] = t;
          }
      }
    return out;
  }

  std::string name() const {
    switch (tag) {
      case AmbientTag::Minkowski: return "minkowski";
      case AmbientTag::Euclidean: return "euclidean";
      default: return "schwarzschild_slice(m=" + std::to_string(mass) + ")";
    }
  }
};

}  // namespace qlm
