#include "stlconf/io/config.hpp"
#include "temp_dir.hpp"

#include <gtest/gtest.h>

using namespace stlconf;
using namespace stlconf::io;
using fixtures::config_json;
using fixtures::run_cli;
using fixtures::TempDir;

namespace {

std::string error_path(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST(Config, ShippedConfigsLoadAndRoundTrip) {
  for (const char* name :
       {"case_study.json", "case_study_literal.json", "case_study_posterior.json", "weighted.json", "table1.json"}) {
    const auto cfg = parse_config(config_json(name));
    const Json once = to_json(cfg);
    EXPECT_EQ(to_json(parse_config(once)).dump(), once.dump()) << name;
    EXPECT_EQ(cfg.predicates.size(), 4u) << name;
    EXPECT_NO_THROW(cfg.model.build()) << name;
  }
}

TEST(Config, CaseStudyValues) {
  const auto cfg = parse_config(config_json("case_study.json"));
  EXPECT_EQ(cfg.delta, 0.01);
  EXPECT_EQ(cfg.mc_samples, 27947u);
  EXPECT_EQ(cfg.seed, 2024u);
  EXPECT_EQ(cfg.gamma_form, decomp::GammaForm::standard_deviation);
  EXPECT_EQ(cfg.method, MethodChoice::both);
  ASSERT_TRUE(cfg.region.has_value());
  EXPECT_EQ(cfg.region->lower(0), -3.5);
  EXPECT_EQ(parse_config(config_json("case_study_literal.json")).gamma_form, decomp::GammaForm::paper_literal);
  EXPECT_EQ(parse_config(config_json("case_study_posterior.json")).normalizer, bayes::NormalizerMethod::adaptive);
}

TEST(Config, ErrorPaths) {
  const Json base = config_json("case_study_posterior.json");
  auto with = [&](const std::string& pointer, const Json& value) {
    Json j = base;
    j[Json::json_pointer(pointer)] = value;
    return error_path(j);
  };
  EXPECT_EQ(with("/model/a", 1.2), "/model/a");
  EXPECT_EQ(with("/model/preset", "other"), "/model/preset");
  EXPECT_EQ(with("/delta", 0.0), "/delta");
  EXPECT_EQ(with("/delta", "x"), "/delta");
  EXPECT_EQ(with("/formula", "(mu1 & mu9)"), "/formula");
  EXPECT_EQ(with("/formula", "(mu1 U[3,1] mu2)"), "/formula");
  EXPECT_EQ(with("/gamma_form", "var"), "/gamma_form");
  EXPECT_EQ(with("/method", "exact"), "/method");
  EXPECT_EQ(with("/normalizer", "fancy"), "/normalizer");
  EXPECT_EQ(with("/data/n_exp", 0), "/data/n_exp");
  EXPECT_EQ(with("/data/theta_true", Json::array({1.0})), "/data/theta_true");
  EXPECT_EQ(with("/x0", Json::array({0.0})), "/x0");
  EXPECT_EQ(with("/prior/upper", Json::array({-20.0, 10.0})), "/prior");
  EXPECT_EQ(with("/seed", -1), "/seed");
  EXPECT_EQ(with("/pwa/per_axis", 0), "/pwa/per_axis");
  EXPECT_EQ(with("/mc/samples", 10), "/mc/samples");
  Json missing = base;
  missing.erase("formula");
  EXPECT_EQ(error_path(missing), "/formula");
  EXPECT_EQ(error_path(Json::array()), "/");
}

TEST(Config, MalformedFile) {
  TempDir dir("badjson");
  std::ofstream(dir / "bad.json") << "{ \"model\": ";
  EXPECT_THROW(load_config((dir / "bad.json").string()), ConfigError);
  EXPECT_THROW(load_config((dir / "absent.json").string()), ConfigError);
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli_codes");
  Json bad_formula = fixtures::tiny_config();
  bad_formula["formula"] = "(mu1 & ";
  fixtures::write_config(dir / "bad_formula.json", bad_formula);
  EXPECT_EQ(run_cli("verify --config " + (dir / "bad_formula.json").string() + " --out " + (dir / "o1").string()), 2);

  Json no_samples = fixtures::tiny_config();
  no_samples["data"]["n_exp"] = 0;
  fixtures::write_config(dir / "zero.json", no_samples);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "zero.json").string() + " --out " + (dir / "o2").string()), 2);

  Json no_data = fixtures::tiny_config();
  no_data.erase("data");
  fixtures::write_config(dir / "nodata.json", no_data);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "nodata.json").string() + " --out " + (dir / "o3").string()), 2);

  // Noise-free model: the likelihood covariance is singular.
  Json singular = fixtures::tiny_config();
  singular["model"]["process_variance"] = 0.0;
  singular["model"]["measurement_variance"] = 0.0;
  fixtures::write_config(dir / "singular.json", singular);
  EXPECT_EQ(run_cli("verify --config " + (dir / "singular.json").string() + " --out " + (dir / "o4").string()), 3);

  EXPECT_EQ(run_cli("verify --config " + (dir / "absent.json").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("verify --config " + (dir / "zero.json").string() + " --method exact"), 2);
}

TEST(Cli, SimulateIsReproducible) {
  TempDir dir("cli_sim");
  const std::string cfg = std::string(STLCONF_CONFIG_DIR) + "/case_study_posterior.json";
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --out " + (dir / "b").string()), 0);
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --seed 7 --out " + (dir / "c").string()), 0);
  const std::string csv = fixtures::read_file(dir / "a" / "dataset.csv");
  EXPECT_EQ(csv, fixtures::read_file(dir / "b" / "dataset.csv"));
  EXPECT_EQ(fixtures::read_file(dir / "a" / "dataset.json"), fixtures::read_file(dir / "b" / "dataset.json"));
  EXPECT_NE(csv, fixtures::read_file(dir / "c" / "dataset.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 51);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,u_1,y_1");
  const Json j = Json::parse(fixtures::read_file(dir / "a" / "dataset.json"));
  EXPECT_EQ(j["n_exp"], 50);
  EXPECT_EQ(j["seed"], 2024);
  EXPECT_EQ(j["outputs"].size(), 50u);
}
