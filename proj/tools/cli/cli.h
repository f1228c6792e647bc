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

#ifndef JTSNE_TOOLS_CLI_CLI_H_
#define JTSNE_TOOLS_CLI_CLI_H_

#include <array>
#include <functional>
#include <optional>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "jtsne/protocol/driver.h"
#include "jtsne/protocol/oracle.h"
#include "jtsne/protocol/types.h"
#include "json.hpp"

namespace jtsne::cli {

enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kNetwork = 3,
  kProtocol = 4,
  kData = 5,
};

// A failure tagged with the exit code it maps to.
struct CliError {
  ExitCode exit;
  absl::Status status;
};

// Default classification: transport problems are network errors, argument
// problems config errors, corrupt inputs data errors, the rest protocol.
ExitCode ClassifyStatus(const absl::Status& status);
// Single line: "error code=<CODE> exit=<n>: <message>".
std::string FormatError(const CliError& e);

// Parses CSV text: a header row, numeric columns, and an optional final
// column named "label".
absl::StatusOr<protocol::Dataset> ParseCsv(absl::string_view text,
                                           std::string owner_id);
absl::StatusOr<protocol::Dataset> LoadCsv(const std::string& path,
                                          std::string owner_id);
// "owner=path" or "path" (owner = file stem).
absl::StatusOr<protocol::Dataset> LoadDataArg(const std::string& arg);

// Settings that environment variables may override.
struct Overridable {
  std::string coordinator;
  int listen_port = -1;
  int key_bits = 2048;
  int scale_bits = 24;
};
inline constexpr const char* kEnvCoordinator = "JTSNE_COORDINATOR";
inline constexpr const char* kEnvListenPort = "JTSNE_LISTEN_PORT";
inline constexpr const char* kEnvKeyBits = "JTSNE_KEY_BITS";
inline constexpr const char* kEnvScaleBits = "JTSNE_SCALE_BITS";
// Environment values win over flag values.
absl::Status ApplyEnvOverrides(
    Overridable& settings,
    const std::function<std::optional<std::string>(const char*)>& getenv);

// "alice:10,bob:12"
absl::StatusOr<std::vector<protocol::ParticipantSpec>> ParseRoster(
    absl::string_view text);

// "lo:hi,lo:hi,..." with one range per dimension. Empty text gives none.
absl::StatusOr<std::vector<std::array<double, 2>>> ParseRanges(absl::string_view text);

// Builds a config covering `datasets` in the given order.
protocol::TaskConfig ConfigForDatasets(const std::vector<protocol::Dataset>& datasets,
                                       double perplexity, int iterations,
                                       int key_bits, int scale_bits);

// SHA-256 digests of D (level-2 integers), P and Y.
nlohmann::json OracleDigest(const protocol::OracleResult& r);

struct BenchOptions {
  size_t points = 546;
  size_t dims = 9;
  size_t participants = 2;
  int key_bits = 512;
  int scale_bits = 24;
  int iterations = 1000;
  uint64_t seed = 1;
};
// Published per-step seconds for steps 2..8 (N=546, m=9, 2048-bit keys).
inline constexpr std::array<double, 7> kReferenceStepSeconds = {0.1, 0.1, 10.4, 13.3,
                                                           11.0, 3.1, 0.7};
struct BenchReport {
  BenchOptions options;
  protocol::LocalRunResult run;
  double total_seconds = 0.0;
  // step,seconds,bytes,reference_seconds with one row per step 2..8.
  std::string Csv() const;
  nlohmann::json ToJson() const;
};
absl::StatusOr<BenchReport> RunBench(const BenchOptions& options);
std::vector<protocol::Dataset> SyntheticDatasets(const BenchOptions& options);

}  // namespace jtsne::cli

#endif  // JTSNE_TOOLS_CLI_CLI_H_
