#pragma once

#include "qlm/optimal.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace qlm {

using nlohmann::json;

/// Grid descriptor + {l, m, coefficient} list. Zero coefficients are kept so
/// that round trips are trivially bit-stable; nlohmann prints doubles with
/// shortest round-trip precision.
inline json coefficients_to_json(const GridPtr& g, const VectorXd& c) {
  json coeffs = json::array();
  for (int l = 0; l <= g->lmax(); ++l)
    for (int m = -l; m <= l; ++m)
      coeffs.push_back({{"l", l}, {"m", m}, {"coefficient", c[SphereGrid::index(l, m)]}});
  return {{"grid", {{"lmax", g->lmax()}}}, {"coefficients", coeffs}};
}

inline json field_to_json(const ScalarField& f) {
  return coefficients_to_json(f.grid, f.coeffs());
}

inline VectorXd coefficients_from_json(const json& j, const GridPtr& grid) {
  const int lmax = j.at("grid").at("lmax").get<int>();
  if (grid->lmax() < lmax)
    throw std::invalid_argument("field_from_json: grid too small for the stored field");
  VectorXd c = VectorXd::Zero(grid->ncoeff());
  for (const auto& e : j.at("coefficients")) {
    const int l = e.at("l").get<int>();
    const int m = e.at("m").get<int>();
    if (l > lmax || std::abs(m) > l)
      throw std::invalid_argument("field_from_json: invalid (l, m) entry");
    c[SphereGrid::index(l, m)] = e.at("coefficient").get<double>();
  }
  return c;
}

inline ScalarField field_from_json(const json& j, GridPtr grid = nullptr) {
  if (!grid) grid = SphereGrid::make(j.at("grid").at("lmax").get<int>());
  return {grid, grid->synth(coefficients_from_json(j, grid))};
}

inline json embedding_to_json(const SurfaceEmbedding& e) {
  json comps = json::array();
  for (int k = 0; k < e.ncomp(); ++k)
    comps.push_back(coefficients_to_json(e.grid, e.coeffs[k]));
  return {{"grid", {{"lmax", e.grid->lmax()}}}, {"components", comps}};
}

inline SurfaceEmbedding embedding_from_json(const json& j, GridPtr grid = nullptr) {
  if (!grid) grid = SphereGrid::make(j.at("grid").at("lmax").get<int>());
  // rebuilt from the stored coefficients directly, without re-analysis, so
  // the round trip is exact
  std::vector<VectorXd> c;
  for (const auto& comp : j.at("components"))
    c.push_back(coefficients_from_json(comp, grid));
  return SurfaceEmbedding(grid, std::move(c));
}

/// Scalar data of a dataset in the field serialization (the metric and the
/// one-form are derived quantities of the constructing scenario).
inline json dataset_to_json(const SurfaceDataset& d) {
  json out = {{"provenance", d.provenance},
              {"area", d.sigma.area()},
              {"normH", field_to_json(d.normH)}};
  if (d.meanH) out["meanH"] = field_to_json(*d.meanH);
  if (d.gaussK) out["gaussK"] = field_to_json(*d.gaussK);
  return out;
}

inline json energy_report_to_json(const EnergyReport& rep) {
  return {{"energy", rep.value},
          {"energy_canonical", rep.canonical},
          {"reference_defect", rep.reference_defect},
          {"residual_sup", rep.div_j.v.abs().maxCoeff()},
          {"rho", field_to_json(rep.rho)},
          {"div_j", field_to_json(rep.div_j)},
          {"theta", field_to_json(rep.theta)}};
}

inline json critical_point_report_to_json(const CriticalPointReport& rep) {
  json eig = json::array();
  for (int i = 0; i < rep.hessian_eigenvalues.size(); ++i)
    eig.push_back(rep.hessian_eigenvalues[i]);
  return {{"tau_star", field_to_json(rep.tau_star)},
          {"energy", rep.energy},
          {"residual_sup", rep.residual},
          {"hessian_eigenvalues", eig},
          {"kernel_dim", rep.kernel_dim},
          {"mean_curvature_dominance", rep.mean_curvature_dominance},
          {"converged", rep.converged},
          {"residual_history", rep.history}};
}

/// Fixed shortest-round-trip formatting shared by every CSV writer, so that
/// identical runs produce byte-identical files.
inline std::string format_double(double x) {
  std::ostringstream os;
  os << json(x);
  return os.str();
}

inline std::string weyl_history_csv(const WeylResult& res) {
  std::string out = "iteration,defect\n";
  for (size_t i = 0; i < res.history.size(); ++i)
    out += std::to_string(i) + "," + format_double(res.history[i]) + "\n";
  return out;
}

inline std::string spectrum_csv(const VectorXd& eigenvalues) {
  std::string out = "index,eigenvalue\n";
  for (int i = 0; i < eigenvalues.size(); ++i)
    out += std::to_string(i) + "," + format_double(eigenvalues[i]) + "\n";
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << text;
}

inline json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open: " + path);
  return json::parse(is);  // throws parse_error with byte position
}

}  // namespace qlm
