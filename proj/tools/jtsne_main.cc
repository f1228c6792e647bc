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

// jtsne: run protocol roles, manage tasks, and run the oracle, audit and
// bench harnesses. Failures print one line,
//   error code=<CODE> exit=<n>: <message>
// and exit 2 (config), 3 (network), 4 (protocol) or 5 (data).

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "cli/cli.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/common/status_macros.h"
#include "jtsne/net/coordinator.h"
#include "jtsne/net/runners.h"
#include "jtsne/protocol/audit.h"
#include "jtsne/protocol/driver.h"
#include "jtsne/protocol/oracle.h"

namespace jtsne::cli {
namespace {

using nlohmann::json;

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop = true; }

struct Flags {
  // Shared.
  bool json = false;
  std::string coordinator = "http://127.0.0.1:8080";
  std::string listen = "127.0.0.1:0";
  std::string task;
  std::vector<std::string> data;
  double perplexity = 30.0;
  int key_bits = 0;  // 0: pick the default for the subcommand
  int scale_bits = 24;
  std::string mode = "density";
  bool audit = false;
  std::optional<uint64_t> seed;
  // run
  std::string role;
  std::string journal;
  std::string id;
  std::string out;
  size_t max_tasks = 0;
  // task propose
  std::string config_file;
  std::string roster;
  size_t dims = 0;
  int iterations = 1000;
  double value_bound = 1e4;
  std::string title;
  std::string proposer = "cli";
  uint64_t init_seed = 0;
  std::string participant;
  std::string normalization;
  // bench / audit
  BenchOptions bench;
  std::string fault;
  std::string transcripts;
};

std::optional<std::string> Getenv(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// Applies environment overrides to the flags they shadow.
absl::Status ApplyEnv(Flags& f) {
  Overridable o{f.coordinator, -1, f.key_bits, f.scale_bits};
  JTSNE_RETURN_IF_ERROR(ApplyEnvOverrides(o, Getenv));
  f.coordinator = o.coordinator;
  f.key_bits = o.key_bits;
  f.scale_bits = o.scale_bits;
  if (o.listen_port >= 0) {
    auto ep = net::ParseEndpoint(f.listen);
    const std::string host = ep.ok() ? ep->host : "127.0.0.1";
    f.listen = absl::StrCat(host, ":", o.listen_port);
  }
  return absl::OkStatus();
}

CliError Err(ExitCode code, absl::Status s) { return {code, std::move(s)}; }
CliError Err(absl::Status s) { return {ClassifyStatus(s), std::move(s)}; }

std::optional<CliError> Print(const Flags& f, const json& j, const std::string& human) {
  std::cout << (f.json ? j.dump() : human) << std::endl;
  return std::nullopt;
}

std::optional<CliError> WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) return Err(ExitCode::kConfig, absl::InvalidArgumentError("cannot write " + path));
  out << text;
  return std::nullopt;
}

absl::StatusOr<std::vector<protocol::Dataset>> LoadAll(const std::vector<std::string>& args) {
  std::vector<protocol::Dataset> out;
  for (const auto& a : args) {
    JTSNE_ASSIGN_OR_RETURN(auto d, LoadDataArg(a));
    out.push_back(std::move(d));
  }
  if (out.empty()) return absl::InvalidArgumentError("at least one --data file is required");
  return out;
}

// ------------------------------------------------------------------- run

std::optional<CliError> RunCoordinator(const Flags& f) {
  auto ep = net::ParseEndpoint(f.listen);
  if (!ep.ok()) return Err(ExitCode::kConfig, ep.status());
  net::CoordinatorOptions opts;
  opts.registry.journal_path = f.journal;
  net::CoordinatorServer server(opts);
  if (!f.journal.empty() && std::ifstream(f.journal).good()) {
    if (auto s = server.registry().Replay(f.journal); !s.ok()) return Err(ExitCode::kData, s);
  }
  if (auto s = server.Start(*ep); !s.ok()) return Err(ExitCode::kNetwork, s);
  Print(f, {{"role", "coordinator"}, {"url", server.url()}},
        "coordinator listening on " + server.url());
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.Stop();
  return std::nullopt;
}

std::optional<CliError> RunCollaborator(const Flags& f, net::Role role) {
  auto ep = net::ParseEndpoint(f.listen);
  if (!ep.ok()) return Err(ExitCode::kConfig, ep.status());
  net::NodeOptions opts;
  opts.coordinator_url = f.coordinator;
  opts.listen = *ep;
  opts.audit = f.audit;
  if (role == net::Role::kT) opts.noise_seed = f.seed;
  net::CollaboratorNode node(role, opts);
  if (auto s = node.Start(); !s.ok()) return Err(ExitCode::kNetwork, s);
  const std::string name = role == net::Role::kS ? "collab-s" : "collab-t";
  Print(f, {{"role", name}, {"endpoint", node.endpoint().ToString()}},
        name + " listening on " + node.endpoint().ToString());
  absl::Status s;
  if (!f.task.empty()) {
    s = node.RunTask(f.task);
    // T keeps serving results until told to stop.
    if (s.ok() && role == net::Role::kT && f.max_tasks == 0) {
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  } else {
    s = node.Serve(g_stop, f.max_tasks);
    if (s.ok() && role == net::Role::kT && f.max_tasks != 0) {
      // Let participants fetch results before exiting.
      std::this_thread::sleep_for(std::chrono::seconds(2));
    }
  }
  node.Stop();
  if (!s.ok()) return Err(s);
  return std::nullopt;
}

std::optional<CliError> RunParticipantRole(const Flags& f) {
  if (f.task.empty()) return Err(ExitCode::kConfig, absl::InvalidArgumentError("--task is required"));
  if (f.data.size() != 1) {
    return Err(ExitCode::kConfig,
               absl::InvalidArgumentError("a participant takes exactly one --data file"));
  }
  auto ep = net::ParseEndpoint(f.listen);
  if (!ep.ok()) return Err(ExitCode::kConfig, ep.status());
  auto data = LoadDataArg(f.data[0]);
  if (!data.ok()) return Err(ExitCode::kData, data.status());
  if (!f.id.empty()) data->owner_id = f.id;
  net::NodeOptions opts;
  opts.coordinator_url = f.coordinator;
  opts.listen = *ep;
  opts.audit = f.audit;
  auto out = net::RunParticipant(f.task, *data, opts);
  if (!out.ok()) {
    const bool data_problem = absl::IsInvalidArgument(out.status()) &&
                              std::string(out.status().message()).find("dimension") !=
                                  std::string::npos;
    return Err(data_problem ? ExitCode::kData : ClassifyStatus(out.status()), out.status());
  }
  const json view = out->view.ToJson();
  if (!f.out.empty()) {
    if (auto e = WriteFile(f.out, view.dump())) return e;
  }
  return Print(f, view,
               absl::StrFormat("task %s complete: %d points visible, %d total",
                               f.task, out->view.points.size(), out->view.TotalPoints()));
}

std::optional<CliError> Run(const Flags& f) {
  if (f.seed.has_value() && !f.audit) {
    return Err(ExitCode::kConfig,
               absl::InvalidArgumentError("--seed is a test facility and requires --audit"));
  }
  if (f.role == "coordinator") return RunCoordinator(f);
  if (f.role == "collab-s") return RunCollaborator(f, net::Role::kS);
  if (f.role == "collab-t") return RunCollaborator(f, net::Role::kT);
  if (f.role == "participant") return RunParticipantRole(f);
  return Err(ExitCode::kConfig, absl::InvalidArgumentError("unknown role " + f.role));
}

// ------------------------------------------------------------------ task

std::string Table(const json& tasks) {
  std::string out = absl::StrFormat("%-32s  %-11s  %-24s  %s\n", "TASK_ID", "STATUS",
                                    "PARTICIPANTS", "TITLE");
  for (const auto& t : tasks) {
    std::string roster;
    for (const auto& p : t.at("roster")) {
      absl::StrAppend(&roster, roster.empty() ? "" : ",", p.at("id").get<std::string>(),
                      ":", p.at("count").get<size_t>());
    }
    absl::StrAppendFormat(&out, "%-32s  %-11s  %-24s  %s\n",
                          t.at("task_id").get<std::string>(),
                          t.at("status").get<std::string>(), roster,
                          t.at("title").get<std::string>());
  }
  return out;
}

absl::StatusOr<protocol::TaskConfig> ProposalConfig(const Flags& f) {
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) return absl::InvalidArgumentError("cannot read " + f.config_file);
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) return absl::InvalidArgumentError(f.config_file + " is not JSON");
    return protocol::TaskConfig::FromJson(j);
  }
  protocol::TaskConfig c;
  JTSNE_ASSIGN_OR_RETURN(c.participants, ParseRoster(f.roster));
  c.dims = f.dims;
  c.tsne.perplexity = f.perplexity;
  c.tsne.iterations = f.iterations;
  c.tsne.init_seed = f.init_seed;
  c.key_bits = f.key_bits;
  c.scale_bits = f.scale_bits;
  c.value_bound = f.value_bound;
  c.title = f.title;
  JTSNE_ASSIGN_OR_RETURN(c.mode, aggregate::ParseMode(f.mode));
  JTSNE_ASSIGN_OR_RETURN(c.normalization, ParseRanges(f.normalization));
  return c;
}

std::optional<CliError> TaskPropose(const Flags& f) {
  auto config = ProposalConfig(f);
  if (!config.ok()) return Err(ExitCode::kConfig, config.status());
  net::CoordinatorClient client(f.coordinator);
  auto rec = client.Propose(config->ToJson(), f.proposer);
  if (!rec.ok()) return Err(rec.status());
  return Print(f, *rec, rec->at("task_id").get<std::string>());
}

std::optional<CliError> TaskList(const Flags& f) {
  net::CoordinatorClient client(f.coordinator);
  auto tasks = client.ListTasks();
  if (!tasks.ok()) return Err(tasks.status());
  std::string table = Table(*tasks);
  table.pop_back();
  return Print(f, *tasks, table);
}

std::optional<CliError> TaskStatus(const Flags& f) {
  net::CoordinatorClient client(f.coordinator);
  auto rec = client.GetTask(f.task);
  if (!rec.ok()) return Err(rec.status());
  std::string human = rec->at("status");
  if (rec->at("state") == "Failed") absl::StrAppend(&human, ": ", rec->value("failure", ""));
  return Print(f, *rec, human);
}

std::optional<CliError> TaskResult(const Flags& f) {
  if (f.participant.empty()) {
    return Err(ExitCode::kConfig, absl::InvalidArgumentError("--participant is required"));
  }
  net::CoordinatorClient client(f.coordinator);
  auto art = client.Artifact(f.task, f.participant);
  if (!art.ok()) return Err(art.status());
  if (!f.out.empty()) {
    if (auto e = WriteFile(f.out, art->dump())) return e;
  }
  return Print(f, *art,
               absl::StrFormat("%d points visible to %s", art->at("points").size(),
                               f.participant));
}

// ------------------------------------------------------- oracle/bench/audit

std::optional<CliError> Oracle(const Flags& f) {
  auto data = LoadAll(f.data);
  if (!data.ok()) return Err(ExitCode::kData, data.status());
  protocol::TaskConfig c =
      ConfigForDatasets(*data, f.perplexity, f.iterations, f.key_bits, f.scale_bits);
  c.tsne.init_seed = f.seed.value_or(0);
  if (auto s = c.Validate(); !s.ok()) return Err(ExitCode::kConfig, s);
  auto r = protocol::RunPlaintextOracle(*data, c);
  if (!r.ok()) return Err(r.status());
  const json digest = OracleDigest(*r);
  return Print(f, digest,
               absl::StrFormat("D %s\nP %s\nY %s\nfinal KL %.12g",
                               digest["digests"]["distances"].get<std::string>(),
                               digest["digests"]["p"].get<std::string>(),
                               digest["digests"]["embedding"].get<std::string>(),
                               digest["final_kl"].get<double>()));
}

std::optional<CliError> Bench(const Flags& f) {
  BenchOptions o = f.bench;
  o.key_bits = f.key_bits;
  o.scale_bits = f.scale_bits;
  o.seed = f.seed.value_or(1);
  auto report = RunBench(o);
  if (!report.ok()) return Err(report.status());
  if (!f.out.empty()) {
    if (auto e = WriteFile(f.out, report->Csv())) return e;
  }
  if (f.json) return Print(f, report->ToJson(), "");
  std::cout << report->Csv();
  std::cerr << absl::StrFormat(
      "total %.3f s (key generation %.3f s) for N=%d m=%d key_bits=%d; "
      "reference: 1200 s at N=546 m=9 with 2048-bit keys\n",
      report->total_seconds, report->run.step_seconds[1], o.points, o.dims, o.key_bits);
  return std::nullopt;
}

std::optional<CliError> Audit(const Flags& f) {
  auto data = LoadAll(f.data);
  if (!data.ok()) return Err(ExitCode::kData, data.status());
  protocol::TaskConfig c =
      ConfigForDatasets(*data, f.perplexity, f.iterations, f.key_bits, f.scale_bits);
  c.noise_seed = f.seed;
  c.tsne.init_seed = f.seed.value_or(0);
  protocol::LocalRunOptions opts;
  if (f.fault == "skip-noise") {
    opts.faults.skip_entry_noise = true;
  } else if (f.fault == "identity-permutation") {
    opts.faults.identity_permutation = true;
  } else if (f.fault == "zero-row-noise") {
    opts.faults.zero_row_noise = true;
  } else if (!f.fault.empty()) {
    return Err(ExitCode::kConfig, absl::InvalidArgumentError("unknown fault " + f.fault));
  }
  auto run = protocol::RunLocalProtocol(*data, c, opts);
  if (!run.ok()) return Err(run.status());
  auto oracle = protocol::RunPlaintextOracle(*data, c, false);
  if (!oracle.ok()) return Err(oracle.status());
  const protocol::AuditReport report = protocol::AssertViews(
      run->s_view, run->t_view, run->participant_views, run->ledger,
      {oracle->data_int, oracle->distances_int, *data});
  if (!f.transcripts.empty()) {
    std::string lines = run->s_view.ToJsonLines() + run->t_view.ToJsonLines();
    for (const auto& v : run->participant_views) lines += v.ToJsonLines();
    if (auto e = WriteFile(f.transcripts, lines)) return e;
  }
  std::string human;
  for (const auto& p : report.predicates) {
    absl::StrAppend(&human, p.passed ? "PASS " : "FAIL ", p.id, " ", p.description,
                    p.detail.empty() ? "" : " (" + p.detail + ")", "\n");
  }
  for (const auto& w : report.warnings) absl::StrAppend(&human, "WARN ", w, "\n");
  human.pop_back();
  Print(f, report.ToJson(), human);
  if (!report.passed()) {
    return Err(ExitCode::kProtocol, absl::FailedPreconditionError("view audit failed"));
  }
  return std::nullopt;
}

int Main(int argc, char** argv) {
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  Flags f;
  CLI::App app{"Secure multi-party joint t-SNE"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", f.json, "Machine-readable output");
  app.add_option("--coordinator", f.coordinator, "Coordinator URL")->capture_default_str();
  app.add_option("--key-bits", f.key_bits,
                 "Paillier modulus bits (default 2048; 512 for oracle, bench and audit)");
  app.add_option("--scale-bits", f.scale_bits, "Fixed-point fractional bits");

  auto* run = app.add_subcommand("run", "Run a protocol role");
  run->add_option("--role", f.role, "coordinator | collab-s | collab-t | participant")
      ->required()
      ->check(CLI::IsMember({"coordinator", "collab-s", "collab-t", "participant"}));
  run->add_option("--listen", f.listen, "host:port to listen on")->capture_default_str();
  run->add_option("--task", f.task, "Task id (collaborators discover tasks without it)");
  run->add_option("--data", f.data, "Participant CSV ([owner=]path)");
  run->add_option("--id", f.id, "Participant id (default: data file stem)");
  run->add_option("--journal", f.journal, "Coordinator journal path");
  run->add_option("--out", f.out, "Write the participant's artifact here");
  run->add_option("--max-tasks", f.max_tasks, "Collaborators exit after this many tasks");
  run->add_flag("--audit", f.audit, "Record view transcripts");
  run->add_option("--seed", f.seed, "Deterministic noise (collab-t, audit mode only)");

  auto* task = app.add_subcommand("task", "Manage tasks");
  task->require_subcommand(1);
  auto* propose = task->add_subcommand("propose", "Propose a task");
  propose->add_option("--config", f.config_file, "TaskConfig JSON file");
  propose->add_option("--participants", f.roster, "id:count,id:count,...");
  propose->add_option("--dims", f.dims, "Dimensionality m");
  propose->add_option("--perplexity", f.perplexity)->capture_default_str();
  propose->add_option("--iterations", f.iterations)->capture_default_str();
  propose->add_option("--value-bound", f.value_bound, "Max |x| of any coordinate")
      ->capture_default_str();
  propose->add_option("--mode", f.mode, "scatterplot | density")->capture_default_str();
  propose->add_option("--title", f.title);
  propose->add_option("--proposer", f.proposer);
  propose->add_option("--init-seed", f.init_seed, "Embedding initialization seed");
  propose->add_option("--normalization", f.normalization,
                      "Shared per-dimension ranges lo:hi,lo:hi,... applied by participants");
  task->add_subcommand("list", "List tasks");
  auto* status = task->add_subcommand("status", "Show task status");
  status->add_option("--task", f.task)->required();
  auto* result = task->add_subcommand("result", "Fetch a participant's result");
  result->add_option("--task", f.task)->required();
  result->add_option("--participant", f.participant)->required();
  result->add_option("--out", f.out);

  auto* oracle = app.add_subcommand("oracle", "Plaintext pipeline digests");
  oracle->add_option("--data", f.data, "CSV files ([owner=]path)")->required();
  oracle->add_option("--perplexity", f.perplexity)->capture_default_str();
  oracle->add_option("--iterations", f.iterations)->capture_default_str();
  oracle->add_option("--seed", f.seed, "Embedding initialization seed");

  auto* bench = app.add_subcommand("bench", "Per-step protocol timings as CSV");
  bench->add_option("--points", f.bench.points)->capture_default_str();
  bench->add_option("--dims", f.bench.dims)->capture_default_str();
  bench->add_option("--participants", f.bench.participants)->capture_default_str();
  bench->add_option("--iterations", f.bench.iterations)->capture_default_str();
  bench->add_option("--seed", f.seed);
  bench->add_option("--out", f.out, "Also write the CSV here");

  auto* audit = app.add_subcommand("audit", "Run locally and audit every role's view");
  audit->add_option("--data", f.data, "CSV files ([owner=]path)")->required();
  audit->add_option("--perplexity", f.perplexity)->capture_default_str();
  audit->add_option("--iterations", f.iterations)->capture_default_str();
  audit->add_option("--seed", f.seed);
  audit->add_option("--fault", f.fault,
                    "skip-noise | identity-permutation | zero-row-noise");
  audit->add_option("--transcripts", f.transcripts, "Write view transcripts as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << FormatError(Err(ExitCode::kConfig, absl::InvalidArgumentError(e.what())))
              << std::endl;
    return static_cast<int>(ExitCode::kConfig);
  }
  if (auto s = ApplyEnv(f); !s.ok()) {
    std::cerr << FormatError(Err(ExitCode::kConfig, s)) << std::endl;
    return static_cast<int>(ExitCode::kConfig);
  }

  if (f.key_bits == 0) f.key_bits = (*oracle || *bench || *audit) ? ahe::kTestKeyBits : 2048;

  std::optional<CliError> err;
  if (*run) err = Run(f);
  if (*propose) err = TaskPropose(f);
  if (task->got_subcommand("list")) err = TaskList(f);
  if (*status) err = TaskStatus(f);
  if (*result) err = TaskResult(f);
  if (*oracle) err = Oracle(f);
  if (*bench) err = Bench(f);
  if (*audit) err = Audit(f);
  if (err.has_value()) {
    std::cerr << FormatError(*err) << std::endl;
    return static_cast<int>(err->exit);
  }
  return 0;
}

}  // namespace
}  // namespace jtsne::cli

int main(int argc, char** argv) { return jtsne::cli::Main(argc, argv); }
