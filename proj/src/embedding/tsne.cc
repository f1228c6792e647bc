/*
 * Copyright 2026 The jtsne Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "jtsne/embedding/tsne.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/kernels/gradient.h"

namespace jtsne::embedding {

absl::Status TsneConfig::Validate(size_t n_points) const {
  if (!(perplexity > 0.0)) {
    return absl::InvalidArgumentError("perplexity must be positive");
  }
  if (n_points < 2) {
    return absl::InvalidArgumentError("t-SNE needs at least two points");
  }
  if (perplexity >= (static_cast<double>(n_points) - 1.0) / 3.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("perplexity ", perplexity, " must be below (N - 1) / 3 = ",
                     (static_cast<double>(n_points) - 1.0) / 3.0));
  }
  if (iterations <= 0 || !(learning_rate > 0.0) || !(exaggeration > 0.0) ||
      !(init_stddev > 0.0) || !(min_gain > 0.0) || output_dims <= 0 ||
      !(initial_momentum >= 0.0) || !(final_momentum >= 0.0) ||
      momentum_switch_iteration < 0 || exaggeration_iterations < 0) {
    return absl::InvalidArgumentError(
        "t-SNE hyperparameters must be positive");
  }
  return absl::OkStatus();
}

nlohmann::json TsneConfig::ToJson() const {
  return {{"perplexity", perplexity},
          {"iterations", iterations},
          {"learning_rate", learning_rate},
          {"initial_momentum", initial_momentum},
          {"final_momentum", final_momentum},
          {"momentum_switch_iteration", momentum_switch_iteration},
          {"exaggeration", exaggeration},
          {"exaggeration_iterations", exaggeration_iterations},
          {"min_gain", min_gain},
          {"init_seed", init_seed},
          {"init_stddev", init_stddev},
          {"output_dims", output_dims},
          {"monotone_after_exaggeration", monotone_after_exaggeration}};
}

absl::StatusOr<TsneConfig> TsneConfig::FromJson(const nlohmann::json& j) {
  TsneConfig c;
  if (!j.is_object()) return absl::InvalidArgumentError("tsne must be an object");
  try {
    c.perplexity = j.value("perplexity", c.perplexity);
    c.iterations = j.value("iterations", c.iterations);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.initial_momentum = j.value("initial_momentum", c.initial_momentum);
    c.final_momentum = j.value("final_momentum", c.final_momentum);
    c.momentum_switch_iteration =
        j.value("momentum_switch_iteration", c.momentum_switch_iteration);
    c.exaggeration = j.value("exaggeration", c.exaggeration);
    c.exaggeration_iterations =
        j.value("exaggeration_iterations", c.exaggeration_iterations);
    c.min_gain = j.value("min_gain", c.min_gain);
    c.init_seed = j.value("init_seed", c.init_seed);
    c.init_stddev = j.value("init_stddev", c.init_stddev);
    c.output_dims = j.value("output_dims", c.output_dims);
    c.monotone_after_exaggeration = j.value("monotone_after_exaggeration",
                                            c.monotone_after_exaggeration);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("tsne: ", e.what()));
  }
  return c;
}

namespace {

void Center(RealMatrix& y) {
  const size_t n = y.rows();
  for (size_t k = 0; k < y.cols(); ++k) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += y(i, k);
    mean /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) y(i, k) -= mean;
  }
}

double KlFromKernel(const RealMatrix& p, const kernels::StudentKernel& kernel) {
  double kl = 0.0;
  const size_t n = p.rows();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p(i, j);
      if (pij <= 0.0) continue;
      const double q = std::max(kernel.num(i, j) / kernel.total, kKlFloor);
      kl += pij * std::log(pij / q);
    }
  }
  return kl;
}

absl::Status ApplyUpdate(EmbeddingState& state, const RealMatrix& grad,
                         const TsneConfig& config) {
  const double momentum = state.iteration < config.momentum_switch_iteration
                              ? config.initial_momentum
                              : config.final_momentum;
  auto& y = state.y.data();
  auto& vel = state.velocity.data();
  auto& gains = state.gains.data();
  const auto& g = grad.data();
  for (size_t idx = 0; idx < y.size(); ++idx) {
    const bool same_sign = (g[idx] > 0.0) == (vel[idx] > 0.0);
    gains[idx] = same_sign ? gains[idx] * 0.8 : gains[idx] + 0.2;
    if (gains[idx] < config.min_gain) gains[idx] = config.min_gain;
    vel[idx] = momentum * vel[idx] - config.learning_rate * gains[idx] * g[idx];
    y[idx] += vel[idx];
  }
  Center(state.y);
  for (double v : y) {
    if (!std::isfinite(v)) {
      return absl::InternalError(absl::StrCat(
          "t-SNE diverged: non-finite position at iteration ", state.iteration));
    }
  }
  ++state.iteration;
  return absl::OkStatus();
}

double ExaggerationAt(int iteration, const TsneConfig& config) {
  return iteration < config.exaggeration_iterations ? config.exaggeration : 1.0;
}

absl::Status CheckSymmetric(const ProbabilityMatrix& p) {
  if (p.kind != ProbabilityKind::kSymmetric) {
    return absl::InvalidArgumentError("t-SNE expects a symmetric P");
  }
  if (p.values.rows() != p.values.cols()) {
    return absl::InvalidArgumentError("P must be square");
  }
  return absl::OkStatus();
}

struct Iterate {
  EmbeddingState state;
  kernels::StudentKernel kernel;
  double kl = 0.0;
};

Iterate MakeIterate(EmbeddingState state, const RealMatrix& p) {
  kernels::StudentKernel kernel = kernels::ComputeStudentKernel(state.y);
  const double kl = KlFromKernel(p, kernel);
  return {std::move(state), std::move(kernel), kl};
}

constexpr int kMaxBacktracks = 40;

// One optimizer step. After early exaggeration, a momentum step that raises
// KL is replaced by a backtracking gradient step with velocity cleared and
// gains reset, so the post-exaggeration trace never increases.
absl::StatusOr<Iterate> Advance(Iterate cur, const RealMatrix& p,
                                const TsneConfig& config) {
  const RealMatrix grad = kernels::KlGradient(
      p, ExaggerationAt(cur.state.iteration, config), cur.kernel, cur.state.y);
  EmbeddingState next = cur.state;
  JTSNE_RETURN_IF_ERROR(ApplyUpdate(next, grad, config));
  Iterate out = MakeIterate(std::move(next), p);
  if (!config.monotone_after_exaggeration ||
      cur.state.iteration < config.exaggeration_iterations ||
      out.kl <= cur.kl) {
    return out;
  }
  double step = config.learning_rate;
  for (int attempt = 0; attempt < kMaxBacktracks; ++attempt) {
    step *= 0.5;
    EmbeddingState trial = cur.state;
    for (size_t idx = 0; idx < trial.y.size(); ++idx) {
      trial.y.data()[idx] -= step * grad.data()[idx];
    }
    Center(trial.y);
    std::fill(trial.velocity.data().begin(), trial.velocity.data().end(), 0.0);
    std::fill(trial.gains.data().begin(), trial.gains.data().end(), 1.0);
    ++trial.iteration;
    out = MakeIterate(std::move(trial), p);
    if (out.kl <= cur.kl) return out;
  }
  // No descent found at any step size: hold position.
  std::fill(cur.state.velocity.data().begin(), cur.state.velocity.data().end(),
            0.0);
  std::fill(cur.state.gains.data().begin(), cur.state.gains.data().end(), 1.0);
  ++cur.state.iteration;
  return cur;
}

}  // namespace

EmbeddingState InitialState(size_t n_points, const TsneConfig& config) {
  const auto dims = static_cast<size_t>(config.output_dims);
  EmbeddingState state{RealMatrix(n_points, dims, 0.0),
                       RealMatrix(n_points, dims, 0.0),
                       RealMatrix(n_points, dims, 1.0), 0};
  std::mt19937_64 rng(config.init_seed);
  std::normal_distribution<double> normal(0.0, config.init_stddev);
  for (double& v : state.y.data()) v = normal(rng);
  Center(state.y);
  return state;
}

absl::StatusOr<EmbeddingState> GradientStep(EmbeddingState state,
                                            const ProbabilityMatrix& p,
                                            const TsneConfig& config) {
  JTSNE_RETURN_IF_ERROR(CheckSymmetric(p));
  if (p.values.rows() != state.y.rows()) {
    return absl::InvalidArgumentError("P and Y disagree on N");
  }
  Iterate cur = MakeIterate(std::move(state), p.values);
  JTSNE_ASSIGN_OR_RETURN(Iterate next, Advance(std::move(cur), p.values, config));
  return std::move(next.state);
}

absl::StatusOr<TsneResult> RunTsneFrom(EmbeddingState state,
                                       const ProbabilityMatrix& p,
                                       const TsneConfig& config) {
  JTSNE_RETURN_IF_ERROR(CheckSymmetric(p));
  JTSNE_RETURN_IF_ERROR(config.Validate(p.values.rows()));
  if (p.values.rows() != state.y.rows()) {
    return absl::InvalidArgumentError("P and initial Y disagree on N");
  }
  TsneResult result;
  result.kl_trace.reserve(static_cast<size_t>(config.iterations) + 1);
  Iterate cur = MakeIterate(std::move(state), p.values);
  for (int iter = 0; iter < config.iterations; ++iter) {
    result.kl_trace.push_back(cur.kl);
    JTSNE_ASSIGN_OR_RETURN(cur, Advance(std::move(cur), p.values, config));
  }
  result.kl_trace.push_back(cur.kl);
  result.y = std::move(cur.state.y);
  return result;
}

absl::StatusOr<TsneResult> RunTsne(const ProbabilityMatrix& p,
                                   const TsneConfig& config) {
  return RunTsneFrom(InitialState(p.values.rows(), config), p, config);
}

std::string KlTraceCsv(const std::vector<double>& trace) {
  std::string out = "iteration,kl\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    absl::StrAppend(&out, i, ",", absl::StrFormat("%.17g", trace[i]), "\n");
  }
  return out;
}

}  // namespace jtsne::embedding
