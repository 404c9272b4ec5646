#include "qlm/surfaces.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qlm;

TEST_CASE("round sphere in the t=0 Minkowski slice") {
  auto g = SphereGrid::make(16);
  for (double r : {1.0, 3.0}) {
    SurfaceDataset d = induced_data_spacetime(SurfaceEmbedding::sphere(g, r, true));
    REQUIRE((d.normH.v - 2.0 / r).abs().maxCoeff() < 1e-10);
    REQUIRE(d.alphaH.c1.abs().maxCoeff() < 1e-10);
    REQUIRE(d.alphaH.c2.abs().maxCoeff() < 1e-10);
    REQUIRE((d.sigma.gauss_curvature_values() - 1.0 / (r * r)).abs().maxCoeff() <
            1e-10);
    REQUIRE(std::abs(d.sigma.area() - 4.0 * kPi * r * r) < 1e-9);
  }
}

TEST_CASE("coordinate sphere in flat R^3") {
  auto g = SphereGrid::make(16);
  SurfaceDataset d =
      induced_data_slice(SurfaceEmbedding::sphere(g, 2.0), AmbientSpace::euclidean());
  REQUIRE((d.meanH->v - 1.0).abs().maxCoeff() < 1e-10);
  REQUIRE(d.alphaH.c1.abs().maxCoeff() == 0.0);
}

TEST_CASE("coordinate sphere in the Schwarzschild slice") {
  auto g = SphereGrid::make(16);
  const double r = 4.0, m = 1.0;
  SurfaceDataset d = induced_data_slice(SurfaceEmbedding::sphere(g, r),
                                        AmbientSpace::schwarzschild_slice(m));
  const double expect = (2.0 / r) * std::sqrt(1.0 - 2.0 * m / r);
  REQUIRE((d.meanH->v - expect).abs().maxCoeff() < 1e-10);
  // induced metric is the round sphere of areal radius r
  REQUIRE((d.sigma.gauss_curvature_values() - 1.0 / (r * r)).abs().maxCoeff() < 1e-10);
}

TEST_CASE("Schwarzschild slice rejects surfaces at or inside the horizon") {
  auto g = SphereGrid::make(8);
  REQUIRE_THROWS_AS(induced_data_slice(SurfaceEmbedding::sphere(g, 1.9),
                                       AmbientSpace::schwarzschild_slice(1.0)),
                    std::domain_error);
}

TEST_CASE("ellipsoid curvatures against closed forms") {
  auto g = SphereGrid::make(24);
  const double a = 1.0, b = 1.0, c = 1.3;
  SurfaceEmbedding e = SurfaceEmbedding::ellipsoid(g, a, b, c);
  SliceGeometry geo = slice_geometry(e, AmbientSpace::euclidean());
  detail::EmbeddingJets E(e);
  ArrayXd w = (E.J[0].v / (a * a)).square() + (E.J[1].v / (b * b)).square() +
              (E.J[2].v / (c * c)).square();
  ArrayXd Kexp = 1.0 / (a * a * b * b * c * c * w.square());
  // H = (sum 1/a_i^2)/w^(1/2) - (sum x_i^2/a_i^6)/w^(3/2), w = sum x_i^2/a_i^4
  ArrayXd s2 = E.J[0].v.square() / std::pow(a, 6) + E.J[1].v.square() / std::pow(b, 6) +
               E.J[2].v.square() / std::pow(c, 6);
  ArrayXd Hexp =
      (1.0 / (a * a) + 1.0 / (b * b) + 1.0 / (c * c)) / w.sqrt() - s2 / w.pow(1.5);
  REQUIRE((geo.sigma.gauss_curvature_values() - Kexp).abs().maxCoeff() < 1e-7);
  REQUIRE((geo.mean_curvature.v - Hexp).abs().maxCoeff() < 1e-7);
}

TEST_CASE("light-cone surfaces satisfy 4K = |H|^2 and are round for constant r") {
  auto g = SphereGrid::make(24);
  SECTION("constant profile") {
    double r = 1.7;
    SurfaceEmbedding e = lightcone_surface(ScalarField::constant(g, r));
    SurfaceDataset d = induced_data_spacetime(e);
    REQUIRE((d.sigma.g11() - r * r).abs().maxCoeff() < 1e-10);
    ArrayXd resid = 4.0 * d.gaussK->v - d.normH.v.square();
    REQUIRE(resid.abs().maxCoeff() < 1e-9);
  }
  SECTION("Y_10 profile") {
    ScalarField r{g, 1.0 + 0.3 * ScalarField::harmonic(g, 1, 0).v};
    SurfaceDataset d = induced_data_spacetime(lightcone_surface(r));
    ArrayXd resid = 4.0 * d.gaussK->v - d.normH.v.square();
    REQUIRE(resid.abs().maxCoeff() / d.normH.v.square().maxCoeff() < 1e-8);
  }
  SECTION("Y_20 profile") {
    ScalarField r{g, 1.0 + 0.3 * ScalarField::harmonic(g, 2, 0).v};
    SurfaceDataset d = induced_data_spacetime(lightcone_surface(r));
    ArrayXd resid = 4.0 * d.gaussK->v - d.normH.v.square();
    REQUIRE(resid.abs().maxCoeff() / d.normH.v.square().maxCoeff() < 1e-8);
  }
}

TEST_CASE("boosted round sphere matches the pushforward oracle") {
  auto g = SphereGrid::make(20);
  const double r = 1.0, beta = 0.3;
  SurfaceEmbedding e = SurfaceEmbedding::sphere(g, r, true).boosted_z(beta);
  SurfaceDataset d = induced_data_spacetime(e);
  // the boost is an ambient isometry: pointwise the data equals the
  // unboosted analytic values in the same parametrization
  REQUIRE((d.normH.v - 2.0 / r).abs().maxCoeff() < 1e-8);
  REQUIRE((d.sigma.g11() - r * r).abs().maxCoeff() < 1e-9);
  REQUIRE((d.sigma.g12()).abs().maxCoeff() < 1e-9);
  REQUIRE(d.alphaH.c1.abs().maxCoeff() < 1e-8);
  REQUIRE(d.alphaH.c2.abs().maxCoeff() < 1e-8);
  // while the time function is nontrivial
  REQUIRE(e.time_function().v.abs().maxCoeff() > 0.1);
}

TEST_CASE("graph over the sphere has nonvanishing alpha_H") {
  auto g = SphereGrid::make(20);
  ScalarField h = ScalarField::harmonic(g, 2, 0, 0.05);
  SurfaceDataset d = induced_data_spacetime(SurfaceEmbedding::graph_sphere(g, 1.0, h));
  MetricField& sig = d.sigma;
  ScalarField na{g, norm_squared(sig, d.alphaH).sqrt()};
  REQUIRE(integrate(na, sig) > 1e-4);
}

TEST_CASE("time-symmetric consistency between slice and spacetime extraction") {
  auto g = SphereGrid::make(20);
  // a non-round surface in the t=0 slice
  SurfaceEmbedding e3 = SurfaceEmbedding::ellipsoid(g, 1.0, 1.0, 1.2);
  SurfaceEmbedding e4 = SurfaceEmbedding::ellipsoid(g, 1.0, 1.0, 1.2, true);
  SurfaceDataset ds = induced_data_slice(e3, AmbientSpace::euclidean());
  SurfaceDataset dst = induced_data_spacetime(e4);
  REQUIRE((ds.meanH->v - dst.normH.v).abs().maxCoeff() < 1e-8);
  REQUIRE(dst.alphaH.c1.abs().maxCoeff() < 1e-10);
  REQUIRE(dst.alphaH.c2.abs().maxCoeff() < 1e-10);
}

TEST_CASE("isometry invariance of the extracted data") {
  auto g = SphereGrid::make(16);
  SurfaceEmbedding e = SurfaceEmbedding::ellipsoid(g, 1.0, 1.0, 1.25, true);
  SurfaceDataset d0 = induced_data_spacetime(e);
  SurfaceDataset d1 = induced_data_spacetime(
      e.rotated_z(0.7).translated({0.3, -0.2, 0.1, 0.5}).boosted_z(0.2));
  REQUIRE((d0.sigma.g11() - d1.sigma.g11()).abs().maxCoeff() < 1e-9);
  REQUIRE((d0.normH.v - d1.normH.v).abs().maxCoeff() < 1e-9);
  ArrayXd na0 = norm_squared(d0.sigma, d0.alphaH);
  ArrayXd na1 = norm_squared(d1.sigma, d1.alphaH);
  REQUIRE((na0 - na1).abs().maxCoeff() < 1e-9);
}

TEST_CASE("scaling covariance") {
  auto g = SphereGrid::make(16);
  SurfaceEmbedding e = SurfaceEmbedding::ellipsoid(g, 1.0, 1.0, 1.2, true);
  const double lam = 2.0;
  SurfaceDataset d = induced_data_spacetime(e);
  SurfaceDataset dl = induced_data_spacetime(e.scaled(lam));
  REQUIRE((dl.sigma.g11() - lam * lam * d.sigma.g11()).abs().maxCoeff() < 1e-9);
  REQUIRE((dl.normH.v - d.normH.v / lam).abs().maxCoeff() < 1e-9);
}

TEST_CASE("non-positive radius profile is rejected") {
  auto g = SphereGrid::make(8);
  REQUIRE_THROWS_AS(lightcone_surface(ScalarField::constant(g, -1.0)),
                    std::domain_error);
}
