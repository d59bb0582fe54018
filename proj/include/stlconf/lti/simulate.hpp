#pragma once

#include "stlconf/lti/model.hpp"
#include "stlconf/rng.hpp"
#include "stlconf/stl/formula.hpp"

#include <variant>
#include <vector>

namespace stlconf::lti {

struct SimulationResult {
  stl::Trajectory states;           // x(0..T); one more state than inputs
  std::vector<Vector> clean_outputs;  // C(θ) x(t), t = 0..T-1
  std::vector<Vector> noisy_outputs;  // C(θ) x(t) + e(t)
};

/// Run the model for inputs.size() steps from x0. Inputs outside the model's
/// input box are allowed (identification experiments may excite harder).
inline SimulationResult simulate(const ParametricLti& model, const Vector& theta, const Vector& x0,
                                 const std::vector<Vector>& inputs, RngStream& rng) {
  require_dim(x0.size(), model.n(), "x0");
  const Matrix c = model.C(theta);
  const Matrix w_factor = covariance_factor(model.sigma_w());
  const Matrix e_factor = covariance_factor(model.sigma_e());

  std::vector<Vector> states;
  states.reserve(inputs.size() + 1);
  SimulationResult out;
  out.clean_outputs.reserve(inputs.size());
  out.noisy_outputs.reserve(inputs.size());

  Vector x = x0;
  states.push_back(x);
  for (const auto& u : inputs) {
    require_dim(u.size(), model.m(), "input");
    Vector y = c * x;
    out.noisy_outputs.push_back(y + rng.normal_with_factor(e_factor));
    out.clean_outputs.push_back(std::move(y));
    x = model.A() * x + model.B() * u + model.G() * rng.normal_with_factor(w_factor);
    states.push_back(x);
  }
  out.states = stl::Trajectory(std::move(states));
  return out;
}

/// Identification dataset {ũ(t), ỹ(t)}, t = 0..N_exp-1, recorded from x0.
struct DataSet {
  std::vector<Vector> inputs;
  std::vector<Vector> outputs;
  Vector x0;

  std::size_t size() const { return inputs.size(); }
};

struct UniformInput {
  double lower = -1.0;
  double upper = 1.0;
};
struct GaussianInput {
  double mean = 0.0;
  double stddev = 1.0;
};

/// I.i.d. per-coordinate input distribution for data collection.
using InputSampler = std::variant<UniformInput, GaussianInput>;

inline Vector draw_input(const InputSampler& sampler, Eigen::Index m, RngStream& rng) {
  Vector u(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    u(i) = std::visit(stl::Overloaded{
                          [&](const UniformInput& s) { return rng.uniform(s.lower, s.upper); },
                          [&](const GaussianInput& s) { return s.mean + s.stddev * rng.normal(); },
                      },
                      sampler);
  }
  return u;
}

/// Excite the system at θ_true with i.i.d. inputs and record noisy outputs.
inline DataSet collect_data(const ParametricLti& model, const Vector& theta_true,
                            const InputSampler& sampler, std::size_t n_exp, const Vector& x0,
                            const RngStream& rng) {
  if (n_exp == 0) throw DomainError("collect_data: N_exp must be >= 1");
  RngStream input_rng = rng.substream("inputs");
  RngStream noise_rng = rng.substream("noise");
  DataSet data;
  data.x0 = x0;
  data.inputs.reserve(n_exp);
  for (std::size_t t = 0; t < n_exp; ++t) data.inputs.push_back(draw_input(sampler, model.m(), input_rng));
  auto sim = simulate(model, theta_true, x0, data.inputs, noise_rng);
  data.outputs = std::move(sim.noisy_outputs);
  return data;
}

}  // namespace stlconf::lti
