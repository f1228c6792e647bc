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

#include "cli.h"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "jtsne/common/bytes.h"
#include "jtsne/common/status_macros.h"

namespace jtsne::cli {

namespace {

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  return HexEncode(std::string_view(reinterpret_cast<const char*>(digest),
                                    SHA256_DIGEST_LENGTH));
}

std::string DoubleBytes(const RealMatrix& m) {
  std::string out;
  ByteWriter w(&out);
  w.PutU32(static_cast<uint32_t>(m.rows()));
  w.PutU32(static_cast<uint32_t>(m.cols()));
  for (double v : m.data()) w.PutDouble(v);
  return out;
}

}  // namespace

ExitCode ClassifyStatus(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return ExitCode::kOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return ExitCode::kConfig;
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kCancelled:
      return ExitCode::kNetwork;
    case absl::StatusCode::kDataLoss:
      return ExitCode::kData;
    default:
      return ExitCode::kProtocol;
  }
}

std::string FormatError(const CliError& e) {
  std::string msg = absl::StrReplaceAll(e.status.message(), {{"\n", " "}});
  return absl::StrCat("error code=", absl::StatusCodeToString(e.status.code()),
                      " exit=", static_cast<int>(e.exit), ": ", msg);
}

absl::StatusOr<protocol::Dataset> ParseCsv(absl::string_view text,
                                           std::string owner_id) {
  std::vector<absl::string_view> lines = absl::StrSplit(text, '\n');
  while (!lines.empty() && absl::StripAsciiWhitespace(lines.back()).empty()) {
    lines.pop_back();
  }
  if (lines.empty()) return absl::DataLossError(absl::StrCat(owner_id, ": empty CSV"));
  const std::vector<absl::string_view> header =
      absl::StrSplit(absl::StripAsciiWhitespace(lines[0]), ',');
  const bool has_label =
      absl::StripAsciiWhitespace(header.back()) == "label" && header.size() > 1;
  const size_t dims = header.size() - (has_label ? 1 : 0);
  for (size_t c = 0; c < header.size(); ++c) {
    double unused;
    if (absl::SimpleAtod(header[c], &unused)) {
      return absl::DataLossError(absl::StrCat(
          owner_id, ": line 1 looks like data; a header row is required"));
    }
  }
  protocol::Dataset d{std::move(owner_id), RealMatrix(), {}};
  std::vector<double> values;
  size_t rows = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    const absl::string_view line = absl::StripAsciiWhitespace(lines[i]);
    if (line.empty()) continue;
    const std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (cells.size() != header.size()) {
      return absl::DataLossError(absl::StrCat(d.owner_id, ": line ", i + 1, " has ",
                                              cells.size(), " fields, header has ",
                                              header.size()));
    }
    for (size_t c = 0; c < dims; ++c) {
      double v;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(cells[c]), &v) ||
          !std::isfinite(v)) {
        return absl::DataLossError(absl::StrCat(d.owner_id, ": line ", i + 1,
                                                " column ", c + 1, ": '",
                                                std::string(cells[c]),
                                                "' is not a finite number"));
      }
      values.push_back(v);
    }
    if (has_label) {
      d.labels.emplace_back(std::string(absl::StripAsciiWhitespace(cells.back())));
    }
    ++rows;
  }
  if (rows == 0) return absl::DataLossError(absl::StrCat(d.owner_id, ": no data rows"));
  d.points = RealMatrix(rows, dims, std::move(values));
  return d;
}

absl::StatusOr<protocol::Dataset> LoadCsv(const std::string& path,
                                          std::string owner_id) {
  std::ifstream in(path);
  if (!in) return absl::DataLossError(absl::StrCat("cannot read ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseCsv(buf.str(), std::move(owner_id));
}

absl::StatusOr<protocol::Dataset> LoadDataArg(const std::string& arg) {
  const size_t eq = arg.find('=');
  if (eq != std::string::npos) return LoadCsv(arg.substr(eq + 1), arg.substr(0, eq));
  return LoadCsv(arg, std::filesystem::path(arg).stem().string());
}

absl::Status ApplyEnvOverrides(
    Overridable& s,
    const std::function<std::optional<std::string>(const char*)>& getenv) {
  auto parse_int = [&](const char* name, int& out) -> absl::Status {
    if (auto v = getenv(name)) {
      if (!absl::SimpleAtoi(*v, &out)) {
        return absl::InvalidArgumentError(
            absl::StrCat(name, "='", *v, "' is not an integer"));
      }
    }
    return absl::OkStatus();
  };
  if (auto v = getenv(kEnvCoordinator)) s.coordinator = *v;
  JTSNE_RETURN_IF_ERROR(parse_int(kEnvListenPort, s.listen_port));
  JTSNE_RETURN_IF_ERROR(parse_int(kEnvKeyBits, s.key_bits));
  JTSNE_RETURN_IF_ERROR(parse_int(kEnvScaleBits, s.scale_bits));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<protocol::ParticipantSpec>> ParseRoster(
    absl::string_view text) {
  std::vector<protocol::ParticipantSpec> out;
  for (absl::string_view item : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    const std::vector<absl::string_view> parts = absl::StrSplit(item, ':');
    size_t count = 0;
    if (parts.size() != 2 || !absl::SimpleAtoi(parts[1], &count)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "participant '", std::string(item), "' must look like id:count"));
    }
    out.push_back({std::string(parts[0]), count});
  }
  if (out.empty()) return absl::InvalidArgumentError("no participants given");
  return out;
}

absl::StatusOr<std::vector<std::array<double, 2>>> ParseRanges(absl::string_view text) {
  std::vector<std::array<double, 2>> out;
  for (absl::string_view item : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    const std::vector<absl::string_view> parts = absl::StrSplit(item, ':');
    std::array<double, 2> r{};
    if (parts.size() != 2 || !absl::SimpleAtod(parts[0], &r[0]) ||
        !absl::SimpleAtod(parts[1], &r[1])) {
      return absl::InvalidArgumentError(
          absl::StrCat("range '", std::string(item), "' must look like lo:hi"));
    }
    out.push_back(r);
  }
  return out;
}

protocol::TaskConfig ConfigForDatasets(const std::vector<protocol::Dataset>& datasets,
                                       double perplexity, int iterations,
                                       int key_bits, int scale_bits) {
  protocol::TaskConfig c;
  c.task_id = "local";
  double bound = 1.0;
  for (const auto& d : datasets) {
    c.participants.push_back({d.owner_id, d.points.rows()});
    c.dims = d.points.cols();
    for (double v : d.points.data()) bound = std::max(bound, std::ceil(std::abs(v)));
  }
  c.value_bound = bound;
  c.tsne.perplexity = perplexity;
  c.tsne.iterations = iterations;
  c.key_bits = key_bits;
  c.scale_bits = scale_bits;
  return c;
}

nlohmann::json OracleDigest(const protocol::OracleResult& r) {
  std::string d;
  for (const mpz_class& v : r.distances_int.data()) absl::StrAppend(&d, v.get_str(16), ";");
  return {{"n", r.p.values.rows()},
          {"digests",
           {{"distances", Sha256Hex(d)},
            {"p", Sha256Hex(DoubleBytes(r.p.values))},
            {"embedding", Sha256Hex(DoubleBytes(r.tsne.y))}}},
          {"final_kl", r.tsne.kl_trace.empty() ? 0.0 : r.tsne.kl_trace.back()}};
}

std::vector<protocol::Dataset> SyntheticDatasets(const BenchOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<protocol::Dataset> out;
  size_t placed = 0;
  for (size_t p = 0; p < o.participants; ++p) {
    const size_t count = o.points / o.participants + (p < o.points % o.participants);
    protocol::Dataset d{absl::StrCat("p", p), RealMatrix(count, o.dims), {}};
    for (size_t i = 0; i < count; ++i, ++placed) {
      const double center = static_cast<double>(placed % 3) * 0.3;
      for (double& v : d.points.row(i)) {
        v = std::clamp(center + noise(rng), -1.0, 1.0);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

absl::StatusOr<BenchReport> RunBench(const BenchOptions& o) {
  if (o.participants == 0 || o.points < 2 * o.participants || o.dims == 0) {
    return absl::InvalidArgumentError("bench needs dims >= 1 and >= 2 points per participant");
  }
  const auto data = SyntheticDatasets(o);
  const double perplexity =
      std::min(30.0, std::floor((static_cast<double>(o.points) - 1.0) / 3.0) - 1.0);
  protocol::TaskConfig c =
      ConfigForDatasets(data, std::max(perplexity, 1.0), o.iterations, o.key_bits,
                        o.scale_bits);
  c.noise_seed = o.seed;
  c.tsne.init_seed = o.seed;
  protocol::LocalRunOptions run_opts;
  run_opts.audit = false;
  BenchReport report;
  report.options = o;
  JTSNE_ASSIGN_OR_RETURN(report.run, protocol::RunLocalProtocol(data, c, run_opts));
  for (int s = 1; s <= 8; ++s) report.total_seconds += report.run.step_seconds[s];
  return report;
}

std::string BenchReport::Csv() const {
  std::string out = "step,seconds,bytes,reference_seconds\n";
  for (int s = 2; s <= 8; ++s) {
    absl::StrAppendFormat(&out, "%d,%.6f,%d,%.1f\n", s, run.step_seconds[s],
                          run.step_bytes[s], kReferenceStepSeconds[s - 2]);
  }
  return out;
}

nlohmann::json BenchReport::ToJson() const {
  nlohmann::json steps = nlohmann::json::array();
  for (int s = 2; s <= 8; ++s) {
    steps.push_back({{"step", s},
                     {"seconds", run.step_seconds[s]},
                     {"bytes", run.step_bytes[s]},
                     {"reference_seconds", kReferenceStepSeconds[s - 2]}});
  }
  return {{"points", options.points},
          {"dims", options.dims},
          {"participants", options.participants},
          {"key_bits", options.key_bits},
          {"steps", steps},
          {"key_generation_seconds", run.step_seconds[1]},
          {"total_seconds", total_seconds},
          {"reference",
           {{"total_seconds_546x9_2048bit", 1200.0},
            {"note", "reference figures are reported, not asserted"}}}};
}

}  // namespace jtsne::cli
