#pragma once

#include "stlconf/confidence/estimate.hpp"
#include "stlconf/decomp/chance.hpp"
#include "stlconf/feasibility/pwa.hpp"
#include "stlconf/io/config.hpp"
#include "stlconf/lti/simulate.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace stlconf::io {

/// Shortest decimal text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

template <class Atom>
Json to_json(const decomp::DecompositionResult<Atom>& r) {
  Json groups = Json::array();
  for (const auto& g : r.groups) {
    Json leaves = Json::array();
    for (const auto& l : g.leaves) {
      leaves.push_back(Json{{"predicate", l.name},
                            {"time", l.time},
                            {"direction", decomp::to_string(l.direction)},
                            {"threshold", l.threshold},
                            {"path", l.path}});
    }
    groups.push_back(Json{{"label", g.label}, {"path", g.path}, {"requirement", g.requirement}, {"leaves", leaves}});
  }
  return Json{{"delta", r.delta},
              {"t0", r.t0},
              {"leaf_count", r.leaf_count()},
              {"unsatisfiable", r.unsatisfiable},
              {"groups", groups}};
}

inline Json to_json(const confidence::ConfidenceEstimate& e, std::uint64_t seed) {
  Json j = Json::object();
  j["method"] = confidence::to_string(e.method);
  j["value"] = e.value;
  j["value_clamped"] = e.clamped();
  j["samples"] = e.samples;
  j["seed"] = seed;
  j["variance_estimate"] = e.variance_estimate;
  j["standard_error"] = e.standard_error();
  if (e.method == confidence::Method::monte_carlo) {
    j["sample_variance"] = e.sample_variance;
    j["satisfied_fraction"] = e.satisfied_fraction;
  }
  j["chebyshev_epsilon"] = e.chebyshev_epsilon;
  j["chebyshev_probability"] = e.chebyshev_probability;
  j["region_volume"] = e.region_volume;
  if (e.method == confidence::Method::pwa) {
    j["unknown_mass"] = e.unknown_mass;
    j["interval"] = Json::array({e.value, e.upper_bracket()});
    Json cells = Json::array();
    for (const auto& c : e.cells) {
      cells.push_back(Json{{"lower", to_json(c.cell.lower)},
                           {"upper", to_json(c.cell.upper)},
                           {"label", feasibility::to_string(c.cell.label)},
                           {"mass", c.mass},
                           {"variance", c.variance}});
    }
    j["cells"] = cells;
  }
  return j;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// theta_lo_1..theta_lo_d, theta_hi_1..theta_hi_d, label
inline std::string cells_csv(const std::vector<feasibility::ThetaCell>& cells) {
  std::string s;
  if (cells.empty()) return "label\n";
  const Eigen::Index d = cells.front().lower.size();
  for (Eigen::Index i = 0; i < d; ++i) s += "theta_lo_" + std::to_string(i + 1) + ",";
  for (Eigen::Index i = 0; i < d; ++i) s += "theta_hi_" + std::to_string(i + 1) + ",";
  s += "label\n";
  for (const auto& c : cells) {
    for (Eigen::Index i = 0; i < d; ++i) s += fmt(c.lower(i)) + ",";
    for (Eigen::Index i = 0; i < d; ++i) s += fmt(c.upper(i)) + ",";
    s += std::string(feasibility::to_string(c.label)) + "\n";
  }
  return s;
}

/// t, u_1..u_m, y_1..y_p
inline std::string dataset_csv(const lti::DataSet& data) {
  std::string s = "t";
  const Eigen::Index m = data.inputs.empty() ? 0 : data.inputs.front().size();
  const Eigen::Index p = data.outputs.empty() ? 0 : data.outputs.front().size();
  for (Eigen::Index i = 0; i < m; ++i) s += ",u_" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < p; ++i) s += ",y_" + std::to_string(i + 1);
  s += "\n";
  for (std::size_t t = 0; t < data.size(); ++t) {
    s += std::to_string(t);
    for (Eigen::Index i = 0; i < m; ++i) s += "," + fmt(data.inputs[t](i));
    for (Eigen::Index i = 0; i < p; ++i) s += "," + fmt(data.outputs[t](i));
    s += "\n";
  }
  return s;
}

inline Json dataset_json(const lti::DataSet& data) {
  Json inputs = Json::array(), outputs = Json::array();
  for (const auto& u : data.inputs) inputs.push_back(to_json(u));
  for (const auto& y : data.outputs) outputs.push_back(to_json(y));
  return Json{{"x0", to_json(data.x0)}, {"n_exp", data.size()}, {"inputs", inputs}, {"outputs", outputs}};
}

}  // namespace stlconf::io
