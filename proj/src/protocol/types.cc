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

#include "jtsne/protocol/types.h"

#include <cmath>
#include <set>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace jtsne::protocol {

namespace {

bool ValidId(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

absl::Status Dataset::Validate(size_t dims) const {
  if (!ValidId(owner_id)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid owner id '", owner_id, "'"));
  }
  if (points.rows() == 0) {
    return absl::InvalidArgumentError(absl::StrCat(owner_id, ": no points"));
  }
  if (points.cols() != dims) {
    return absl::InvalidArgumentError(
        absl::StrCat(owner_id, ": data has dimension ", points.cols(),
                     " but the task expects dimension ", dims));
  }
  if (!labels.empty() && labels.size() != points.rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat(owner_id, ": ", labels.size(), " labels for ",
                     points.rows(), " points"));
  }
  for (size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points.data()[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat(owner_id, ": non-finite value in row ", i / dims));
    }
  }
  return absl::OkStatus();
}

size_t TaskConfig::TotalPoints() const {
  size_t n = 0;
  for (const auto& p : participants) n += p.count;
  return n;
}

absl::StatusOr<RealMatrix> TaskConfig::Normalize(const RealMatrix& points) const {
  if (normalization.empty()) return points;
  if (points.cols() != normalization.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("normalization covers ", normalization.size(),
                     " dimensions, data has ", points.cols()));
  }
  RealMatrix out = points;
  for (size_t i = 0; i < out.rows(); ++i) {
    for (size_t k = 0; k < out.cols(); ++k) {
      const auto [lo, hi] = normalization[k];
      const double v = out(i, k);
      if (v < lo || v > hi) {
        return absl::OutOfRangeError(absl::StrCat("row ", i, " dimension ", k + 1,
                                                  ": ", v, " is outside the shared range [",
                                                  lo, ", ", hi, "]"));
      }
      out(i, k) = (v - lo) / (hi - lo);
    }
  }
  return out;
}

double TaskConfig::EffectiveSigmaRange() const {
  return sigma_range > 0.0 ? sigma_range : 10.0 * value_bound;
}

double TaskConfig::EffectiveEtaRange() const {
  if (eta_range > 0.0) return eta_range;
  // Ten times the largest possible squared distance.
  return 10.0 * static_cast<double>(dims) * 4.0 * value_bound * value_bound;
}

absl::Status TaskConfig::Validate() const {
  std::vector<std::string> problems;
  if (!task_id.empty() && !ValidId(task_id)) {
    problems.push_back("task_id: must match [A-Za-z0-9_.-]{1,64}");
  }
  if (participants.empty()) problems.push_back("participants: none listed");
  std::set<std::string> seen;
  for (const auto& p : participants) {
    if (!ValidId(p.id)) {
      problems.push_back(absl::StrCat("participants: invalid id '", p.id, "'"));
    }
    if (!seen.insert(p.id).second) {
      problems.push_back(absl::StrCat("participants: duplicate id '", p.id, "'"));
    }
    if (p.count == 0) {
      problems.push_back(absl::StrCat("participants: '", p.id, "' has count 0"));
    }
  }
  if (dims == 0) problems.push_back("dims: must be >= 1");
  if (key_bits < 512 || key_bits % 2 != 0) {
    problems.push_back("key_bits: must be an even number >= 512");
  }
  if (scale_bits < 1 || scale_bits > 60) {
    problems.push_back("scale_bits: must be in [1, 60]");
  }
  if (!(value_bound > 0.0) || !std::isfinite(value_bound)) {
    problems.push_back("value_bound: must be positive");
  }
  if (!(sigma_range >= 0.0) || !std::isfinite(sigma_range)) {
    problems.push_back("sigma_range: must be non-negative");
  }
  if (!(eta_range >= 0.0) || !std::isfinite(eta_range)) {
    problems.push_back("eta_range: must be non-negative");
  }
  if (!normalization.empty()) {
    if (normalization.size() != dims) {
      problems.push_back(absl::StrCat("normalization: ", normalization.size(),
                                      " ranges for ", dims, " dimensions"));
    }
    for (const auto& [lo, hi] : normalization) {
      if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        problems.push_back("normalization: each range needs finite lo < hi");
        break;
      }
    }
    if (value_bound < 1.0) {
      problems.push_back("value_bound: must be >= 1 when normalization is set");
    }
  }
  if (!participants.empty()) {
    if (absl::Status s = tsne.Validate(TotalPoints()); !s.ok()) {
      problems.push_back(absl::StrCat("tsne: ", s.message()));
    }
  }
  if (problems.empty() && key_bits >= 512) {
    if (absl::Status s = CheckOverflowBudget(key_bits); !s.ok()) {
      problems.push_back(absl::StrCat("key_bits: ", s.message()));
    }
  }
  if (!problems.empty()) {
    return absl::InvalidArgumentError(absl::StrJoin(problems, "; "));
  }
  return absl::OkStatus();
}

absl::Status TaskConfig::CheckOverflowBudget(int modulus_bits) const {
  const double m = static_cast<double>(dims);
  const double b = value_bound;
  const double s = EffectiveSigmaRange();
  // Largest level-2 magnitude anywhere in the pipeline, in units of F^2:
  // noised distances, the entry-noise correction, and blinded distances.
  const double noised = m * 4.0 * (b + s) * (b + s);
  const double correction = m * (4.0 * s * s + 8.0 * s * b);
  const double blinded = m * 4.0 * b * b + EffectiveEtaRange();
  const double worst = std::max({noised, correction, blinded});
  const double bits = std::log2(worst) + 2.0 * scale_bits + 1.0;
  // n >= 2^(modulus_bits - 1), so n / 2 >= 2^(modulus_bits - 2).
  if (bits >= static_cast<double>(modulus_bits - 2)) {
    return absl::OutOfRangeError(absl::StrCat(
        "overflow budget needs about ", std::ceil(bits),
        " bits of plaintext headroom but a ", modulus_bits,
        "-bit modulus provides ", modulus_bits - 2));
  }
  return absl::OkStatus();
}

nlohmann::json TaskConfig::ToJson() const {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : participants) {
    parts.push_back({{"id", p.id}, {"count", p.count}});
  }
  nlohmann::json j = {{"task_id", task_id},
                      {"title", title},
                      {"description", description},
                      {"participants", parts},
                      {"dims", dims},
                      {"tsne", tsne.ToJson()},
                      {"key_bits", key_bits},
                      {"scale_bits", scale_bits},
                      {"value_bound", value_bound},
                      {"sigma_range", sigma_range},
                      {"eta_range", eta_range},
                      {"mode", aggregate::ModeName(mode)}};
  if (!normalization.empty()) j["normalization"] = normalization;
  if (noise_seed) j["noise_seed"] = *noise_seed;
  return j;
}

absl::StatusOr<TaskConfig> TaskConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) return absl::InvalidArgumentError("config must be an object");
  TaskConfig c;
  try {
    c.task_id = j.value("task_id", "");
    c.title = j.value("title", "");
    c.description = j.value("description", "");
    for (const auto& p : j.at("participants")) {
      c.participants.push_back(
          {p.at("id").get<std::string>(), p.at("count").get<size_t>()});
    }
    c.dims = j.at("dims").get<size_t>();
    if (j.contains("tsne")) {
      auto t = embedding::TsneConfig::FromJson(j.at("tsne"));
      if (!t.ok()) return t.status();
      c.tsne = *t;
    }
    c.key_bits = j.value("key_bits", c.key_bits);
    c.scale_bits = j.value("scale_bits", c.scale_bits);
    c.value_bound = j.value("value_bound", c.value_bound);
    c.sigma_range = j.value("sigma_range", c.sigma_range);
    c.eta_range = j.value("eta_range", c.eta_range);
    if (j.contains("normalization")) {
      c.normalization = j.at("normalization").get<std::vector<std::array<double, 2>>>();
    }
    if (j.contains("noise_seed") && !j.at("noise_seed").is_null()) {
      c.noise_seed = j.at("noise_seed").get<uint64_t>();
    }
    auto mode = aggregate::ParseMode(j.value("mode", "density"));
    if (!mode.ok()) return mode.status();
    c.mode = *mode;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  return c;
}

std::vector<size_t> NoiseLedger::InversePermutation() const {
  std::vector<size_t> inv(pi.size());
  for (size_t a = 0; a < pi.size(); ++a) inv[pi[a]] = a;
  return inv;
}

bool IsPermutation(const std::vector<size_t>& pi) {
  std::vector<bool> seen(pi.size(), false);
  for (size_t v : pi) {
    if (v >= pi.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace jtsne::protocol
