#pragma once

#include "stlconf/bayes/inference.hpp"
#include "stlconf/confidence/estimate.hpp"
#include "stlconf/feasibility/pwa.hpp"
#include "stlconf/feasibility/satisfaction.hpp"
#include "stlconf/io/config.hpp"
#include "stlconf/io/report.hpp"
#include "stlconf/parallel.hpp"
#include "stlconf/rng.hpp"
#include "stlconf/stl/parser.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace stlconf::pipeline {

using io::ExperimentConfig;
using io::Json;

/// Re-throw an error with the name of the stage that raised it.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(std::string(name) + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(std::string(name) + ": " + e.what());
  }
}

/// Everything derived from a configuration that does not depend on data.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg)
      : cfg_(std::move(cfg)),
        model_(cfg_.model.build()),
        problem_(stage("chance_decomp", [&] {
          return feasibility::VerificationProblem(model_, stl::parse_stl(cfg_.formula, cfg_.predicate_table()),
                                                  cfg_.delta, cfg_.x0, cfg_.weights, cfg_.gamma_form);
        })),
        prior_(cfg_.prior.build()) {}

  const ExperimentConfig& config() const { return cfg_; }
  const lti::ParametricLti& model() const { return model_; }
  const feasibility::VerificationProblem& problem() const { return problem_; }
  const bayes::PriorSpec& prior() const { return prior_; }
  RngStream rng() const { return RngStream(cfg_.seed); }

  int sat(const Vector& theta) const { return feasibility::satisfaction_fn(theta, problem_); }

  /// The configured region, or the prior support.
  Box search_box() const { return cfg_.region ? *cfg_.region : prior_.support(); }

  bool wants_mc() const { return cfg_.method != io::MethodChoice::pwa; }
  bool wants_pwa() const { return cfg_.method != io::MethodChoice::mc; }

  feasibility::RegionResult restrict() const {
    return stage("feasibility", [&] {
      return feasibility::restrict_region(problem_, search_box(), cfg_.restrict_tolerance);
    });
  }

  std::vector<feasibility::ThetaCell> classified_cells(const Box& box) const {
    return stage("feasibility", [&] {
      auto cells = feasibility::pwa_partition(box, cfg_.pwa_per_axis);
      parallel_for(cells.size(), cfg_.threads,
                   [&](std::size_t i) { cells[i].label = feasibility::pwa_classify(cells[i], problem_); });
      return cells;
    });
  }

 private:
  ExperimentConfig cfg_;
  lti::ParametricLti model_;
  feasibility::VerificationProblem problem_;
  bayes::PriorSpec prior_;
};

struct ConfidenceRun {
  std::optional<confidence::ConfidenceEstimate> mc;
  std::optional<confidence::ConfidenceEstimate> pwa;
  std::optional<confidence::ConfidenceEstimate> pilot;
};

inline ConfidenceRun compute_confidence(const Experiment& ex, const bayes::PosteriorDensity& post, const Box& box,
                                        const std::vector<feasibility::ThetaCell>& cells, const RngStream& rng,
                                        std::size_t threads) {
  const auto& cfg = ex.config();
  ConfidenceRun run;
  auto sat = [&](const Vector& th) { return ex.sat(th); };
  stage("confidence", [&] {
    if (ex.wants_mc()) {
      std::size_t n = cfg.mc_samples;
      if (cfg.mc_confidence_floor) {
        run.pilot = confidence::mc_confidence(post, sat, box, cfg.mc_pilot_samples, rng.substream("mc_pilot"),
                                              cfg.chebyshev_epsilon, threads);
        n = std::max<std::size_t>(100, confidence::chebyshev_sample_size(cfg.chebyshev_epsilon, *cfg.mc_confidence_floor,
                                                                       run.pilot->sample_variance, box.volume()));
      }
      run.mc = confidence::mc_confidence(post, sat, box, n, rng.substream("mc"), cfg.chebyshev_epsilon, threads);
    }
    if (ex.wants_pwa()) {
      run.pwa = confidence::pwa_confidence(post, cells, cfg.pwa_per_cell_samples, rng.substream("pwa"),
                                           cfg.chebyshev_epsilon, threads);
    }
    return 0;
  });
  return run;
}

inline Json estimates_json(const ConfidenceRun& run, std::uint64_t seed) {
  Json j = Json::object();
  if (run.pilot) j["monte_carlo_pilot"] = io::to_json(*run.pilot, seed);
  if (run.mc) j["monte_carlo"] = io::to_json(*run.mc, seed);
  if (run.pwa) j["pwa"] = io::to_json(*run.pwa, seed);
  return j;
}

/// theta1, theta2, density on a per_axis × per_axis node grid over `box`.
inline std::string contour_csv(const bayes::PosteriorDensity& post, const Box& box, std::size_t per_axis,
                               std::size_t threads) {
  if (box.dim() != 2 || per_axis < 2 || box.empty) return "theta1,theta2,density\n";
  std::vector<double> dens(per_axis * per_axis);
  const auto n = static_cast<double>(per_axis - 1);
  auto node = [&](std::size_t i, std::size_t j) {
    Vector th(2);
    th(0) = box.lower(0) + (box.upper(0) - box.lower(0)) * static_cast<double>(i) / n;
    th(1) = box.lower(1) + (box.upper(1) - box.lower(1)) * static_cast<double>(j) / n;
    return th;
  };
  parallel_for(per_axis, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < per_axis; ++i) {
      const Vector th = node(i, j);
      dens[j * per_axis + i] = post.support().contains(th) ? post.density(th) : 0.0;
    }
  });
  std::string s = "theta1,theta2,density\n";
  for (std::size_t j = 0; j < per_axis; ++j) {
    for (std::size_t i = 0; i < per_axis; ++i) {
      const Vector th = node(i, j);
      s += io::fmt(th(0)) + "," + io::fmt(th(1)) + "," + io::fmt(dens[j * per_axis + i]) + "\n";
    }
  }
  return s;
}

struct VerifyOutcome {
  Json report;
  feasibility::RegionResult region;
  Box integration_box;
  std::vector<feasibility::ThetaCell> cells;
  ConfidenceRun run;
  std::optional<lti::DataSet> data;
  std::string contour;
};

inline lti::DataSet collect(const Experiment& ex, const io::DataPlan& plan, const RngStream& rng) {
  return stage("lti_model", [&] {
    return lti::collect_data(ex.model(), plan.theta_true, plan.input, plan.n_exp, ex.config().x0, rng);
  });
}

/// decompose → restrict_region → posterior → confidence (mc and/or pwa).
inline VerifyOutcome compute_verify(const ExperimentConfig& cfg) {
  const Experiment ex(cfg);
  const RngStream rng = ex.rng();
  VerifyOutcome out;

  out.region = ex.restrict();
  out.integration_box = cfg.restrict ? out.region.box : ex.search_box();

  lti::DataSet data;
  data.x0 = cfg.x0;
  if (cfg.data) {
    data = collect(ex, *cfg.data, rng.substream("data"));
    out.data = data;
  }
  const auto post = stage("bayes_infer", [&] {
    return bayes::posterior(data, ex.model(), ex.prior(), cfg.posterior_samples, rng.substream("posterior"), cfg.threads,
                            cfg.normalizer);
  });

  if (ex.wants_pwa()) out.cells = ex.classified_cells(out.integration_box);
  out.run = compute_confidence(ex, *post, out.integration_box, out.cells, rng, cfg.threads);
  out.contour = contour_csv(*post, ex.search_box(), cfg.contour_per_axis, cfg.threads);

  Json& r = out.report;
  r["command"] = "verify";
  r["config"] = io::to_json(cfg);
  r["rng"] = Json{{"algorithm", std::string(RngStream::kAlgorithm)}, {"seed", cfg.seed}};
  r["decomposition"] = io::to_json(ex.problem().decomposition());
  r["region"] = Json{{"search", io::to_json(ex.search_box())},
                     {"restricted", io::to_json(out.region.box)},
                     {"tightened", out.region.tightened},
                     {"cells_examined", out.region.cells_examined},
                     {"integration", io::to_json(out.integration_box)}};
  r["posterior"] = Json{{"n_exp", data.size()},
                        {"log_normalizer", post->log_normalizer()},
                        {"normalizer_relative_error", post->normalizer_relative_error()},
                        {"normalizer_samples", post->normalizer_samples()}};
  r["estimates"] = estimates_json(out.run, cfg.seed);
  Json files = Json::array({"report.json", "posterior_contour.csv"});
  if (ex.wants_pwa()) files.push_back("feasible_cells.csv");
  if (out.data) files.push_back("dataset.csv");
  r["files"] = files;
  return out;
}

inline VerifyOutcome run_verify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  VerifyOutcome out = compute_verify(cfg);
  io::ensure_directory(out_dir);
  io::write_json(out_dir / "report.json", out.report);
  io::write_text(out_dir / "posterior_contour.csv", out.contour);
  if (!out.cells.empty()) io::write_text(out_dir / "feasible_cells.csv", io::cells_csv(out.cells));
  if (out.data) io::write_text(out_dir / "dataset.csv", io::dataset_csv(*out.data));
  return out;
}

struct Table1Row {
  Vector theta_true;
  std::vector<double> mc_values, pwa_values;
};

inline std::pair<double, double> mean_and_variance(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(v.size() - 1)};
}

struct Table1Outcome {
  Json report;
  std::vector<Table1Row> rows;
  std::string csv;
};

/// R seeded repetitions of collect_data → posterior → confidence per θ_true.
/// Repetitions run concurrently with their own substreams; the feasibility
/// analysis (restricted region, PWA labels) is shared since it ignores data.
inline Table1Outcome compute_table1(const ExperimentConfig& cfg) {
  if (cfg.table1_thetas.empty()) throw ConfigError("/table1/theta_true", "table1 requires a list of parameters");
  const Experiment ex(cfg);
  const RngStream rng = ex.rng();
  const auto region = ex.restrict();
  const Box box = cfg.restrict ? region.box : ex.search_box();
  std::vector<feasibility::ThetaCell> cells;
  if (ex.wants_pwa()) cells = ex.classified_cells(box);

  const std::size_t R = cfg.table1_repetitions;
  const std::size_t T = cfg.table1_thetas.size();
  std::vector<ConfidenceRun> runs(T * R);
  io::DataPlan plan;
  plan.n_exp = cfg.table1_n_exp;
  if (cfg.data) plan.input = cfg.data->input;

  parallel_for(T * R, cfg.threads, [&](std::size_t job) {
    const std::size_t ti = job / R, rep = job % R;
    const RngStream rr = rng.substream("table1/theta" + std::to_string(ti), rep);
    io::DataPlan p = plan;
    p.theta_true = cfg.table1_thetas[ti];
    const lti::DataSet data = collect(ex, p, rr.substream("data"));
    const auto post = stage("bayes_infer", [&] {
      return bayes::posterior(data, ex.model(), ex.prior(), cfg.posterior_samples, rr.substream("posterior"), 1,
                            cfg.normalizer);
    });
    runs[job] = compute_confidence(ex, *post, box, cells, rr, 1);
  });

  Table1Outcome out;
  Json rows = Json::array();
  Json warnings = Json::array();
  if (R == 1) warnings.push_back("repetitions = 1: variances are reported as 0");
  out.csv = "theta_true,mc_mean,mc_variance,pwa_mean,pwa_variance\n";
  for (std::size_t ti = 0; ti < T; ++ti) {
    Table1Row row{cfg.table1_thetas[ti], {}, {}};
    for (std::size_t rep = 0; rep < R; ++rep) {
      const auto& run = runs[ti * R + rep];
      if (run.mc) row.mc_values.push_back(run.mc->value);
      if (run.pwa) row.pwa_values.push_back(run.pwa->value);
    }
    const auto [mm, mv] = mean_and_variance(row.mc_values);
    const auto [pm, pv] = mean_and_variance(row.pwa_values);
    std::string label = "[";
    for (Eigen::Index i = 0; i < row.theta_true.size(); ++i) label += (i ? " " : "") + io::fmt(row.theta_true(i));
    label += "]";
    out.csv += "\"" + label + "\"," + (ex.wants_mc() ? io::fmt(mm) + "," + io::fmt(mv) : std::string(",")) + "," +
               (ex.wants_pwa() ? io::fmt(pm) + "," + io::fmt(pv) : std::string(",")) + "\n";
    Json jr = Json{{"theta_true", io::to_json(row.theta_true)}};
    if (ex.wants_mc()) jr["monte_carlo"] = Json{{"mean", mm}, {"variance", mv}, {"values", row.mc_values}};
    if (ex.wants_pwa()) jr["pwa"] = Json{{"mean", pm}, {"variance", pv}, {"values", row.pwa_values}};
    rows.push_back(jr);
    out.rows.push_back(std::move(row));
  }
  out.report["command"] = "table1";
  out.report["config"] = io::to_json(cfg);
  out.report["rng"] = Json{{"algorithm", std::string(RngStream::kAlgorithm)}, {"seed", cfg.seed}};
  out.report["decomposition"] = io::to_json(ex.problem().decomposition());
  out.report["region"] = Json{{"restricted", io::to_json(region.box)}, {"integration", io::to_json(box)}};
  out.report["repetitions"] = R;
  out.report["rows"] = rows;
  out.report["warnings"] = warnings;
  out.report["files"] = Json::array({"report.json", "table1.csv"});
  return out;
}

inline Table1Outcome run_table1(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  Table1Outcome out = compute_table1(cfg);
  if (cfg.table1_repetitions == 1) std::cerr << "warning: repetitions = 1, variances reported as 0\n";
  io::ensure_directory(out_dir);
  io::write_json(out_dir / "report.json", out.report);
  io::write_text(out_dir / "table1.csv", out.csv);
  return out;
}

/// collect_data at the configured θ_true; writes dataset.csv and dataset.json.
inline lti::DataSet run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  if (!cfg.data) throw ConfigError("/data", "simulate requires a data section");
  const Experiment ex(cfg);
  const lti::DataSet data = collect(ex, *cfg.data, ex.rng().substream("data"));
  io::ensure_directory(out_dir);
  io::write_text(out_dir / "dataset.csv", io::dataset_csv(data));
  Json j = io::dataset_json(data);
  j["theta_true"] = io::to_json(cfg.data->theta_true);
  j["input"] = io::to_json(cfg.data->input);
  j["seed"] = cfg.seed;
  io::write_json(out_dir / "dataset.json", j);
  return data;
}

}  // namespace stlconf::pipeline
