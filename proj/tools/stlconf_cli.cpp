#include "stlconf/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::string> method;
  std::optional<std::size_t> threads;
};

stlconf::io::ExperimentConfig load(const Options& o) {
  auto cfg = stlconf::io::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.method) {
    if (*o.method == "mc") {
      cfg.method = stlconf::io::MethodChoice::mc;
    } else if (*o.method == "pwa") {
      cfg.method = stlconf::io::MethodChoice::pwa;
    } else {
      cfg.method = stlconf::io::MethodChoice::both;
    }
  }
  return cfg;
}

void add_common(CLI::App* cmd, Options& o, bool with_method) {
  cmd->add_option("--config", o.config, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed, overrides the configuration");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)");
  if (with_method) {
    cmd->add_option("--method", o.method, "confidence estimator")->check(CLI::IsMember({"mc", "pwa", "both"}));
  }
}

void print_estimates(const stlconf::pipeline::ConfidenceRun& run) {
  if (run.mc) {
    std::printf("monte_carlo  %.6f  (se %.2e, N %zu, chebyshev %.4f)\n", run.mc->value, run.mc->standard_error(),
                run.mc->samples, run.mc->chebyshev_probability);
  }
  if (run.pwa) {
    std::printf("pwa          %.6f  (se %.2e, unknown mass %.6f)\n", run.pwa->value, run.pwa->standard_error(),
                run.pwa->unknown_mass);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence that a parametric LTI system satisfies an STL specification"};
  app.require_subcommand(1);
  Options o;
  auto* verify = app.add_subcommand("verify", "restrict, infer and estimate the confidence");
  add_common(verify, o, true);
  auto* table1 = app.add_subcommand("table1", "repeated experiments over a list of true parameters");
  add_common(table1, o, true);
  auto* simulate = app.add_subcommand("simulate", "collect an identification dataset");
  add_common(simulate, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load(o);
    if (verify->parsed()) {
      const auto out = stlconf::pipeline::run_verify(cfg, o.out);
      print_estimates(out.run);
    } else if (table1->parsed()) {
      const auto out = stlconf::pipeline::run_table1(cfg, o.out);
      for (const auto& row : out.rows) {
        std::cout << row.theta_true.transpose() << "  reps " << std::max(row.mc_values.size(), row.pwa_values.size())
                  << "\n";
      }
    } else {
      const auto data = stlconf::pipeline::run_simulate(cfg, o.out);
      std::cout << "wrote " << data.size() << " samples to " << o.out << "\n";
    }
  } catch (const stlconf::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const stlconf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const stlconf::ParseError& e) {
    std::cerr << "formula error: " << e.what() << "\n";
    return 2;
  } catch (const stlconf::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const stlconf::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
