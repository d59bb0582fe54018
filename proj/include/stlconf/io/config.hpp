#pragma once

#include "stlconf/bayes/inference.hpp"
#include "stlconf/decomp/affine.hpp"
#include "stlconf/lti/model.hpp"
#include "stlconf/lti/simulate.hpp"
#include "stlconf/stl/parser.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace stlconf::io {

using Json = nlohmann::ordered_json;

/// Model description: either the Laguerre preset or explicit matrices.
struct ModelSpec {
  std::string preset;  // "laguerre" or empty for explicit
  double a = 0.4;
  double process_variance = 0.5;
  double measurement_variance = 0.5;
  double input_bound = 0.2;
  Matrix A, B, G, C0, Sigma_w, Sigma_e;
  std::vector<Matrix> C_basis;
  Vector input_lower, input_upper;

  lti::ParametricLti build() const {
    if (preset == "laguerre") return lti::laguerre_model(a, process_variance, measurement_variance, input_bound);
    return lti::ParametricLti(A, B, G, C0, C_basis, Sigma_w, Sigma_e, lti::InputBox(input_lower, input_upper));
  }
};

struct PredicateSpec {
  std::string name;
  decomp::ModelPredicate predicate;
};

struct PriorConfig {
  bayes::PriorKind kind = bayes::PriorKind::uniform_box;
  Vector lower, upper;
  std::vector<std::size_t> shape;
  std::vector<double> values;

  bayes::PriorSpec build() const {
    Box support(lower, upper);
    if (kind == bayes::PriorKind::uniform_box) return bayes::PriorSpec::uniform(support);
    return bayes::PriorSpec::tabulated(support, shape, values);
  }
};

struct DataPlan {
  Vector theta_true;
  std::size_t n_exp = 50;
  lti::InputSampler input = lti::UniformInput{-2.0, 2.0};
};

enum class MethodChoice { mc, pwa, both };

inline const char* to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::mc: return "mc";
    case MethodChoice::pwa: return "pwa";
    case MethodChoice::both: return "both";
  }
  return "both";
}

struct ExperimentConfig {
  ModelSpec model;
  Vector x0;
  std::vector<PredicateSpec> predicates;
  std::string formula;
  double delta = 0.01;
  decomp::WeightScheme weights;
  decomp::GammaForm gamma_form = decomp::GammaForm::standard_deviation;
  PriorConfig prior;
  std::optional<Box> region;
  bool restrict = true;
  double restrict_tolerance = 1e-2;
  std::optional<DataPlan> data;
  MethodChoice method = MethodChoice::both;
  std::size_t mc_samples = 27947;
  // When set, the Monte Carlo sample count comes from a pilot run and Chebyshev's bound.
  std::optional<double> mc_confidence_floor;
  std::size_t mc_pilot_samples = 2000;
  double chebyshev_epsilon = 0.005;
  std::size_t posterior_samples = 20000;
  bayes::NormalizerMethod normalizer = bayes::NormalizerMethod::uniform;
  std::size_t pwa_per_axis = 5;
  std::size_t pwa_per_cell_samples = 2000;
  std::size_t contour_per_axis = 50;
  std::vector<Vector> table1_thetas;
  std::size_t table1_repetitions = 30;
  std::size_t table1_n_exp = 50;
  std::uint64_t seed = 2024;
  std::size_t threads = 0;

  stl::PredicateTable<decomp::ModelPredicate> predicate_table() const {
    stl::PredicateTable<decomp::ModelPredicate> t;
    for (const auto& p : predicates) t.emplace(p.name, p.predicate);
    return t;
  }
};

namespace detail {

class Reader {
 public:
  explicit Reader(const Json& root) : root_(root) {}

  static std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

  static const Json* find(const Json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  static const Json& require(const Json& obj, const std::string& key, const std::string& path) {
    const Json* j = find(obj, key);
    if (j == nullptr) throw ConfigError(join(path, key), "required field is missing");
    return *j;
  }

  static double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
  }

  static std::size_t count(const Json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return j.get<std::size_t>();
  }

  static std::string text(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
  }

  static bool boolean(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
    return j.get<bool>();
  }

  static Vector vector(const Json& j, const std::string& path) {
    if (j.is_number()) return Vector::Constant(1, j.get<double>());
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "/" + std::to_string(i));
    return v;
  }

  /// Row-major nested arrays; a scalar is a 1×1 matrix.
  static Matrix matrix(const Json& j, const std::string& path) {
    if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError(path, "expected an array of rows");
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
      const std::string rp = path + "/" + std::to_string(r);
      if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(rp, "rows must have equal length");
      for (std::size_t c = 0; c < cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], rp + "/" + std::to_string(c));
      }
    }
    return m;
  }

  static Box box(const Json& j, const std::string& path) {
    const Vector lo = vector(require(j, "lower", path), join(path, "lower"));
    const Vector hi = vector(require(j, "upper", path), join(path, "upper"));
    if (lo.size() != hi.size()) throw ConfigError(path, "lower and upper differ in length");
    if ((lo.array() > hi.array()).any()) throw ConfigError(path, "lower exceeds upper");
    return Box(lo, hi);
  }

  const Json& root() const { return root_; }

 private:
  const Json& root_;
};

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

inline Json to_json(const Box& b) {
  Json j = Json::object();
  j["lower"] = to_json(b.lower);
  j["upper"] = to_json(b.upper);
  if (b.empty) j["empty"] = true;
  return j;
}

}  // namespace detail

using detail::to_json;

/// Parse and validate a configuration document. Field paths in errors use
/// JSON-pointer form, e.g. "/model/a".
inline ExperimentConfig parse_config(const Json& root) {
  using R = detail::Reader;
  if (!root.is_object()) throw ConfigError("/", "configuration must be a JSON object");
  ExperimentConfig cfg;

  const Json& model = R::require(root, "model", "");
  if (const Json* preset = R::find(model, "preset")) {
    cfg.model.preset = R::text(*preset, "/model/preset");
    if (cfg.model.preset != "laguerre") throw ConfigError("/model/preset", "unknown preset (expected \"laguerre\")");
    if (const Json* j = R::find(model, "a")) cfg.model.a = R::number(*j, "/model/a");
    if (const Json* j = R::find(model, "process_variance")) cfg.model.process_variance = R::number(*j, "/model/process_variance");
    if (const Json* j = R::find(model, "measurement_variance")) {
      cfg.model.measurement_variance = R::number(*j, "/model/measurement_variance");
    }
    if (const Json* j = R::find(model, "input_bound")) cfg.model.input_bound = R::number(*j, "/model/input_bound");
    if (!(std::abs(cfg.model.a) < 1.0)) throw ConfigError("/model/a", "must satisfy |a| < 1");
    if (!(cfg.model.process_variance >= 0.0)) throw ConfigError("/model/process_variance", "must be >= 0");
    if (!(cfg.model.measurement_variance >= 0.0)) throw ConfigError("/model/measurement_variance", "must be >= 0");
    if (!(cfg.model.input_bound >= 0.0)) throw ConfigError("/model/input_bound", "must be >= 0");
  } else {
    auto& m = cfg.model;
    m.A = R::matrix(R::require(model, "A", "/model"), "/model/A");
    m.B = R::matrix(R::require(model, "B", "/model"), "/model/B");
    m.G = R::matrix(R::require(model, "G", "/model"), "/model/G");
    m.C0 = R::matrix(R::require(model, "C0", "/model"), "/model/C0");
    const Json& basis = R::require(model, "C_basis", "/model");
    if (!basis.is_array()) throw ConfigError("/model/C_basis", "expected an array of matrices");
    for (std::size_t i = 0; i < basis.size(); ++i) m.C_basis.push_back(R::matrix(basis[i], "/model/C_basis/" + std::to_string(i)));
    m.Sigma_w = R::matrix(R::require(model, "Sigma_w", "/model"), "/model/Sigma_w");
    m.Sigma_e = R::matrix(R::require(model, "Sigma_e", "/model"), "/model/Sigma_e");
    const Box ib = R::box(R::require(model, "input_box", "/model"), "/model/input_box");
    m.input_lower = ib.lower;
    m.input_upper = ib.upper;
  }
  lti::ParametricLti built = [&] {
    try {
      return cfg.model.build();
    } catch (const Error& e) {
      throw ConfigError("/model", e.what());
    }
  }();

  cfg.x0 = Vector::Zero(built.n());
  if (const Json* j = R::find(root, "x0")) cfg.x0 = R::vector(*j, "/x0");
  if (cfg.x0.size() != built.n()) throw ConfigError("/x0", "length must equal the state dimension");

  const Json& preds = R::require(root, "predicates", "");
  if (!preds.is_object() || preds.empty()) throw ConfigError("/predicates", "expected a non-empty object");
  for (auto it = preds.begin(); it != preds.end(); ++it) {
    const std::string path = "/predicates/" + it.key();
    PredicateSpec ps;
    ps.name = it.key();
    if (ps.name.empty() || ps.name == "T" || ps.name == "F" || ps.name == "G" || ps.name == "U") {
      throw ConfigError(path, "reserved or empty predicate name");
    }
    const std::string domain = it->contains("domain") ? R::text((*it)["domain"], path + "/domain") : "output";
    if (domain == "output") {
      ps.predicate.domain = decomp::PredicateDomain::output;
    } else if (domain == "state") {
      ps.predicate.domain = decomp::PredicateDomain::state;
    } else {
      throw ConfigError(path + "/domain", "expected \"output\" or \"state\"");
    }
    ps.predicate.offset = R::number(R::require(*it, "offset", path), path + "/offset");
    ps.predicate.coeffs = R::vector(R::require(*it, "coeffs", path), path + "/coeffs");
    const Eigen::Index want = domain == "output" ? built.p() : built.n();
    if (ps.predicate.coeffs.size() != want) {
      throw ConfigError(path + "/coeffs", "length must be " + std::to_string(want));
    }
    cfg.predicates.push_back(std::move(ps));
  }

  cfg.formula = R::text(R::require(root, "formula", ""), "/formula");
  try {
    (void)stl::parse_stl(cfg.formula, cfg.predicate_table());
  } catch (const ParseError& e) {
    throw ConfigError("/formula", e.what());
  } catch (const DomainError& e) {
    throw ConfigError("/formula", e.what());
  }

  if (const Json* j = R::find(root, "delta")) cfg.delta = R::number(*j, "/delta");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("/delta", "must lie in (0, 1)");

  if (const Json* w = R::find(root, "weights")) {
    const std::string mode = w->contains("mode") ? R::text((*w)["mode"], "/weights/mode") : "uniform";
    if (mode == "uniform") {
      cfg.weights.mode = decomp::WeightMode::uniform;
    } else if (mode == "explicit") {
      cfg.weights.mode = decomp::WeightMode::specified;
      if (const Json* nodes = R::find(*w, "nodes")) {
        if (!nodes->is_object()) throw ConfigError("/weights/nodes", "expected an object of node paths");
        for (auto it = nodes->begin(); it != nodes->end(); ++it) {
          const Vector v = R::vector(*it, "/weights/nodes/" + it.key());
          cfg.weights.weights[it.key()] = std::vector<double>(v.data(), v.data() + v.size());
        }
      }
    } else {
      throw ConfigError("/weights/mode", "expected \"uniform\" or \"explicit\"");
    }
  }

  if (const Json* j = R::find(root, "gamma_form")) {
    const std::string g = R::text(*j, "/gamma_form");
    if (g == "std") {
      cfg.gamma_form = decomp::GammaForm::standard_deviation;
    } else if (g == "paper_literal") {
      cfg.gamma_form = decomp::GammaForm::paper_literal;
    } else {
      throw ConfigError("/gamma_form", "expected \"std\" or \"paper_literal\"");
    }
  }

  const Json& prior = R::require(root, "prior", "");
  {
    const std::string kind = prior.contains("kind") ? R::text(prior["kind"], "/prior/kind") : "uniform_box";
    const Box support = R::box(prior, "/prior");
    if (support.dim() != built.d()) throw ConfigError("/prior", "support dimension must equal the parameter count");
    if (!(support.volume() > 0.0)) throw ConfigError("/prior", "support must have positive volume");
    cfg.prior.lower = support.lower;
    cfg.prior.upper = support.upper;
    if (kind == "uniform_box") {
      cfg.prior.kind = bayes::PriorKind::uniform_box;
    } else if (kind == "tabulated") {
      cfg.prior.kind = bayes::PriorKind::tabulated;
      const Json& shape = R::require(prior, "shape", "/prior");
      if (!shape.is_array()) throw ConfigError("/prior/shape", "expected an array of counts");
      for (std::size_t i = 0; i < shape.size(); ++i) cfg.prior.shape.push_back(R::count(shape[i], "/prior/shape/" + std::to_string(i)));
      const Vector vals = R::vector(R::require(prior, "values", "/prior"), "/prior/values");
      cfg.prior.values.assign(vals.data(), vals.data() + vals.size());
      try {
        (void)cfg.prior.build();
      } catch (const Error& e) {
        throw ConfigError("/prior", e.what());
      }
    } else {
      throw ConfigError("/prior/kind", "expected \"uniform_box\" or \"tabulated\"");
    }
  }

  if (const Json* j = R::find(root, "region")) {
    cfg.region = R::box(*j, "/region");
    if (cfg.region->dim() != built.d()) throw ConfigError("/region", "dimension must equal the parameter count");
  }
  if (const Json* j = R::find(root, "restrict")) cfg.restrict = R::boolean(*j, "/restrict");
  if (const Json* j = R::find(root, "restrict_tolerance")) {
    cfg.restrict_tolerance = R::number(*j, "/restrict_tolerance");
    if (!(cfg.restrict_tolerance > 0.0)) throw ConfigError("/restrict_tolerance", "must be > 0");
  }

  if (const Json* d = R::find(root, "data")) {
    DataPlan plan;
    plan.theta_true = R::vector(R::require(*d, "theta_true", "/data"), "/data/theta_true");
    if (plan.theta_true.size() != built.d()) throw ConfigError("/data/theta_true", "length must equal the parameter count");
    if (const Json* j = R::find(*d, "n_exp")) plan.n_exp = R::count(*j, "/data/n_exp");
    if (plan.n_exp == 0) throw ConfigError("/data/n_exp", "must be >= 1");
    if (const Json* in = R::find(*d, "input")) {
      const std::string kind = in->contains("kind") ? R::text((*in)["kind"], "/data/input/kind") : "uniform";
      if (kind == "uniform") {
        lti::UniformInput u;
        if (const Json* j = R::find(*in, "lower")) u.lower = R::number(*j, "/data/input/lower");
        if (const Json* j = R::find(*in, "upper")) u.upper = R::number(*j, "/data/input/upper");
        if (!(u.lower <= u.upper)) throw ConfigError("/data/input", "lower exceeds upper");
        plan.input = u;
      } else if (kind == "gaussian") {
        lti::GaussianInput g;
        if (const Json* j = R::find(*in, "mean")) g.mean = R::number(*j, "/data/input/mean");
        if (const Json* j = R::find(*in, "stddev")) g.stddev = R::number(*j, "/data/input/stddev");
        if (!(g.stddev >= 0.0)) throw ConfigError("/data/input/stddev", "must be >= 0");
        plan.input = g;
      } else {
        throw ConfigError("/data/input/kind", "expected \"uniform\" or \"gaussian\"");
      }
    }
    cfg.data = plan;
  }

  if (const Json* j = R::find(root, "method")) {
    const std::string m = R::text(*j, "/method");
    if (m == "mc") {
      cfg.method = MethodChoice::mc;
    } else if (m == "pwa") {
      cfg.method = MethodChoice::pwa;
    } else if (m == "both") {
      cfg.method = MethodChoice::both;
    } else {
      throw ConfigError("/method", "expected \"mc\", \"pwa\" or \"both\"");
    }
  }

  if (const Json* mc = R::find(root, "mc")) {
    if (const Json* j = R::find(*mc, "samples")) cfg.mc_samples = R::count(*j, "/mc/samples");
    if (const Json* j = R::find(*mc, "confidence_floor")) {
      cfg.mc_confidence_floor = R::number(*j, "/mc/confidence_floor");
      if (!(*cfg.mc_confidence_floor > 0.0 && *cfg.mc_confidence_floor < 1.0)) {
        throw ConfigError("/mc/confidence_floor", "must lie in (0, 1)");
      }
    }
    if (const Json* j = R::find(*mc, "pilot_samples")) cfg.mc_pilot_samples = R::count(*j, "/mc/pilot_samples");
  }
  if (cfg.mc_samples < 100) throw ConfigError("/mc/samples", "must be >= 100");
  if (cfg.mc_pilot_samples < 100) throw ConfigError("/mc/pilot_samples", "must be >= 100");
  if (const Json* j = R::find(root, "chebyshev_epsilon")) cfg.chebyshev_epsilon = R::number(*j, "/chebyshev_epsilon");
  if (!(cfg.chebyshev_epsilon > 0.0)) throw ConfigError("/chebyshev_epsilon", "must be > 0");
  if (const Json* j = R::find(root, "posterior_samples")) cfg.posterior_samples = R::count(*j, "/posterior_samples");
  if (cfg.posterior_samples < 1000) throw ConfigError("/posterior_samples", "must be >= 1000");
  if (const Json* j = R::find(root, "normalizer")) {
    const std::string m = R::text(*j, "/normalizer");
    if (m == "uniform") {
      cfg.normalizer = bayes::NormalizerMethod::uniform;
    } else if (m == "adaptive") {
      cfg.normalizer = bayes::NormalizerMethod::adaptive;
    } else {
      throw ConfigError("/normalizer", "expected \"uniform\" or \"adaptive\"");
    }
  }

  if (const Json* p = R::find(root, "pwa")) {
    if (const Json* j = R::find(*p, "per_axis")) cfg.pwa_per_axis = R::count(*j, "/pwa/per_axis");
    if (const Json* j = R::find(*p, "per_cell_samples")) cfg.pwa_per_cell_samples = R::count(*j, "/pwa/per_cell_samples");
  }
  if (cfg.pwa_per_axis == 0) throw ConfigError("/pwa/per_axis", "must be >= 1");
  if (cfg.pwa_per_cell_samples == 0) throw ConfigError("/pwa/per_cell_samples", "must be >= 1");
  if (const Json* c = R::find(root, "contour")) {
    if (const Json* j = R::find(*c, "per_axis")) cfg.contour_per_axis = R::count(*j, "/contour/per_axis");
  }

  if (const Json* t = R::find(root, "table1")) {
    const Json& list = R::require(*t, "theta_true", "/table1");
    if (!list.is_array() || list.empty()) throw ConfigError("/table1/theta_true", "expected a non-empty array of parameters");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "/table1/theta_true/" + std::to_string(i);
      Vector th = R::vector(list[i], path);
      if (th.size() != built.d()) throw ConfigError(path, "length must equal the parameter count");
      cfg.table1_thetas.push_back(th);
    }
    if (const Json* j = R::find(*t, "repetitions")) cfg.table1_repetitions = R::count(*j, "/table1/repetitions");
    if (cfg.table1_repetitions == 0) throw ConfigError("/table1/repetitions", "must be >= 1");
    if (const Json* j = R::find(*t, "n_exp")) cfg.table1_n_exp = R::count(*j, "/table1/n_exp");
    if (cfg.table1_n_exp == 0) throw ConfigError("/table1/n_exp", "must be >= 1");
  }

  if (const Json* j = R::find(root, "seed")) {
    if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0)) {
      throw ConfigError("/seed", "expected an unsigned 64-bit integer");
    }
    cfg.seed = j->get<std::uint64_t>();
  }
  if (const Json* j = R::find(root, "threads")) cfg.threads = R::count(*j, "/threads");
  return cfg;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("malformed JSON: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

inline Json to_json(const lti::InputSampler& s) {
  return std::visit(stl::Overloaded{
                        [](const lti::UniformInput& u) { return Json{{"kind", "uniform"}, {"lower", u.lower}, {"upper", u.upper}}; },
                        [](const lti::GaussianInput& g) { return Json{{"kind", "gaussian"}, {"mean", g.mean}, {"stddev", g.stddev}}; },
                    },
                    s);
}

/// Fully explicit form of a configuration. parse_config(to_json(cfg)) yields cfg.
inline Json to_json(const ExperimentConfig& cfg) {
  Json j = Json::object();
  Json model = Json::object();
  if (cfg.model.preset == "laguerre") {
    model["preset"] = "laguerre";
    model["a"] = cfg.model.a;
    model["process_variance"] = cfg.model.process_variance;
    model["measurement_variance"] = cfg.model.measurement_variance;
    model["input_bound"] = cfg.model.input_bound;
  } else {
    model["A"] = to_json(cfg.model.A);
    model["B"] = to_json(cfg.model.B);
    model["G"] = to_json(cfg.model.G);
    model["C0"] = to_json(cfg.model.C0);
    Json basis = Json::array();
    for (const auto& c : cfg.model.C_basis) basis.push_back(to_json(c));
    model["C_basis"] = basis;
    model["Sigma_w"] = to_json(cfg.model.Sigma_w);
    model["Sigma_e"] = to_json(cfg.model.Sigma_e);
    model["input_box"] = Json{{"lower", to_json(cfg.model.input_lower)}, {"upper", to_json(cfg.model.input_upper)}};
  }
  j["model"] = model;
  j["x0"] = to_json(cfg.x0);
  Json preds = Json::object();
  for (const auto& p : cfg.predicates) {
    preds[p.name] = Json{{"domain", p.predicate.domain == decomp::PredicateDomain::output ? "output" : "state"},
                         {"offset", p.predicate.offset},
                         {"coeffs", to_json(p.predicate.coeffs)}};
  }
  j["predicates"] = preds;
  j["formula"] = cfg.formula;
  j["delta"] = cfg.delta;
  Json weights = Json::object();
  weights["mode"] = cfg.weights.mode == decomp::WeightMode::uniform ? "uniform" : "explicit";
  if (cfg.weights.mode == decomp::WeightMode::specified) {
    Json nodes = Json::object();
    for (const auto& [k, v] : cfg.weights.weights) nodes[k] = v;
    weights["nodes"] = nodes;
  }
  j["weights"] = weights;
  j["gamma_form"] = decomp::to_string(cfg.gamma_form);
  Json prior = Json::object();
  prior["kind"] = cfg.prior.kind == bayes::PriorKind::uniform_box ? "uniform_box" : "tabulated";
  prior["lower"] = to_json(cfg.prior.lower);
  prior["upper"] = to_json(cfg.prior.upper);
  if (cfg.prior.kind == bayes::PriorKind::tabulated) {
    prior["shape"] = cfg.prior.shape;
    prior["values"] = cfg.prior.values;
  }
  j["prior"] = prior;
  if (cfg.region) j["region"] = to_json(*cfg.region);
  j["restrict"] = cfg.restrict;
  j["restrict_tolerance"] = cfg.restrict_tolerance;
  if (cfg.data) {
    j["data"] = Json{{"theta_true", to_json(cfg.data->theta_true)},
                     {"n_exp", cfg.data->n_exp},
                     {"input", to_json(cfg.data->input)}};
  }
  j["method"] = to_string(cfg.method);
  Json mc = Json::object();
  mc["samples"] = cfg.mc_samples;
  if (cfg.mc_confidence_floor) mc["confidence_floor"] = *cfg.mc_confidence_floor;
  mc["pilot_samples"] = cfg.mc_pilot_samples;
  j["mc"] = mc;
  j["chebyshev_epsilon"] = cfg.chebyshev_epsilon;
  j["posterior_samples"] = cfg.posterior_samples;
  j["normalizer"] = bayes::to_string(cfg.normalizer);
  j["pwa"] = Json{{"per_axis", cfg.pwa_per_axis}, {"per_cell_samples", cfg.pwa_per_cell_samples}};
  j["contour"] = Json{{"per_axis", cfg.contour_per_axis}};
  if (!cfg.table1_thetas.empty()) {
    Json list = Json::array();
    for (const auto& t : cfg.table1_thetas) list.push_back(to_json(t));
    j["table1"] = Json{{"theta_true", list}, {"repetitions", cfg.table1_repetitions}, {"n_exp", cfg.table1_n_exp}};
  }
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j;
}

}  // namespace stlconf::io
