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

// Acceptance run: one PASS/FAIL line per criterion on stdout, details on
// stderr. Exit status is non-zero if any criterion fails.
//
//   acceptance --jtsne <path to jtsne binary> [--only 1,3]

#include <arpa/inet.h>
#include <fcntl.h>
#include <gmpxx.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "cli/cli.h"
#include "jtsne/aggregate/density.h"
#include "jtsne/aggregate/grid.h"
#include "jtsne/ahe/paillier.h"
#include "jtsne/embedding/affinities.h"
#include "jtsne/embedding/tsne.h"
#include "jtsne/kernels/distance.h"
#include "jtsne/kernels/gradient.h"
#include "jtsne/net/coordinator.h"
#include "jtsne/protocol/audit.h"
#include "jtsne/protocol/driver.h"
#include "jtsne/protocol/oracle.h"

extern char** environ;

namespace jtsne::acceptance {
namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string summary;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::vector<protocol::Dataset> RandomTask(std::mt19937_64& rng, size_t n, size_t m) {
  const size_t parties = 2 + rng() % 3;
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<protocol::Dataset> out;
  size_t placed = 0;
  for (size_t p = 0; p < parties; ++p) {
    const size_t count = n / parties + (p < n % parties);
    protocol::Dataset d{absl::StrCat("owner", p), RealMatrix(count, m), {}};
    for (size_t i = 0; i < count; ++i, ++placed) {
      const double center = static_cast<double>(placed % 4);
      for (double& v : d.points.row(i)) v = std::clamp(center + g(rng), -7.9, 7.9);
    }
    out.push_back(std::move(d));
  }
  return out;
}

// Brute-force level-2 squared distances from round-half-even fixed point.
Matrix<mpz_class> BruteForceDistances(const std::vector<protocol::Dataset>& data,
                                      int scale_bits) {
  std::vector<std::vector<mpz_class>> x;
  for (const auto& d : data) {
    for (size_t i = 0; i < d.points.rows(); ++i) {
      std::vector<mpz_class> row;
      for (double v : d.points.row(i)) row.emplace_back(std::nearbyint(std::ldexp(v, scale_bits)));
      x.push_back(std::move(row));
    }
  }
  Matrix<mpz_class> out(x.size(), x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = 0; j < x.size(); ++j) {
      mpz_class s = 0;
      for (size_t k = 0; k < x[i].size(); ++k) {
        const mpz_class diff = x[i][k] - x[j][k];
        s += diff * diff;
      }
      out(i, j) = s;
    }
  }
  return out;
}

double MaxAbsDiff(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double worst = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

// ------------------------------------------------------------------ 1 + 4

struct HonestRuns {
  std::vector<protocol::AuditReport> audits;
};

Outcome Exactness(HonestRuns& honest) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  int d_exact = 0;
  double worst_p = 0.0, worst_y = 0.0;
  std::string failure;
  for (int t = 0; t < 10; ++t) {
    auto data = RandomTask(rng, 32, 8);
    protocol::TaskConfig c = cli::ConfigForDatasets(data, 8.0, 1000, 512, 24);
    c.task_id = absl::StrCat("acceptance-", t);
    c.value_bound = 8.0;
    c.noise_seed = rng();
    c.tsne.init_seed = rng();
    auto run = protocol::RunLocalProtocol(data, c);
    auto oracle = protocol::RunPlaintextOracle(data, c);
    if (!run.ok() || !oracle.ok()) {
      failure = absl::StrCat("task ", t, ": ",
                             (run.ok() ? oracle.status() : run.status()).ToString());
      break;
    }
    const auto brute = BruteForceDistances(data, c.scale_bits);
    bool exact = run->distances_int.rows() == brute.rows();
    for (size_t i = 0; exact && i < brute.data().size(); ++i) {
      exact = run->distances_int.data()[i] == brute.data()[i];
    }
    d_exact += exact;
    worst_p = std::max(worst_p, MaxAbsDiff(run->m.values, oracle->p.values));
    worst_y = std::max(worst_y, MaxAbsDiff(run->tsne.y, oracle->tsne.y));
    honest.audits.push_back(protocol::AssertViews(
        run->s_view, run->t_view, run->participant_views, run->ledger,
        {oracle->data_int, oracle->distances_int, data}));
  }
  const double secs = Seconds(start);
  const bool ok = failure.empty() && d_exact == 10 && worst_p <= 1e-9 &&
                  worst_y <= 1e-6 && secs < 300.0;
  return {ok, failure.empty()
                  ? absl::StrFormat("d2 exact %d/10, max|M-P| %.3g <= 1e-9, max|dY| %.3g "
                                    "<= 1e-6, %.1f s < 300 s",
                                    d_exact, worst_p, worst_y, secs)
                  : failure};
}

// ---------------------------------------------------------------------- 2

Outcome RowShiftCancellation() {
  // Squared distances reach the affinity step as level-2 integers divided by
  // F^2, so rows and shifts are dyadic. Sampling on that lattice keeps d + eta
  // exact in double arithmetic, as it is in the ciphertext domain.
  constexpr size_t kRows = 100;
  constexpr int kFracBits = 20;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 50.0);
  std::uniform_real_distribution<double> eta(0.0, 1e6);
  auto lattice = [](double v) { return std::ldexp(std::floor(std::ldexp(v, kFracBits)), -kFracBits); };
  RealMatrix d(kRows, kRows), shifted(kRows, kRows);
  for (size_t i = 0; i < kRows; ++i) {
    const double e = lattice(eta(rng));
    for (size_t j = 0; j < kRows; ++j) {
      d(i, j) = i == j ? 0.0 : lattice(dist(rng));
      shifted(i, j) = d(i, j) + e;
    }
  }
  auto plain = embedding::CalibrateConditionals(d, 15.0);
  auto blinded = embedding::CalibrateConditionals(shifted, 15.0);
  if (!plain.ok() || !blinded.ok()) {
    return {false, (plain.ok() ? blinded.status() : plain.status()).ToString()};
  }
  const double p_diff = MaxAbsDiff(plain->conditional.values, blinded->conditional.values);
  double s_diff = 0.0;
  for (size_t i = 0; i < kRows; ++i) {
    s_diff = std::max(s_diff, std::abs(plain->bandwidths.sigma_sq[i] -
                                       blinded->bandwidths.sigma_sq[i]) /
                                  plain->bandwidths.sigma_sq[i]);
  }
  // Off-lattice rows, for information only.
  RealMatrix generic = d, generic_shifted = d;
  for (size_t i = 0; i < kRows; ++i) {
    const double e = eta(rng);
    for (size_t j = 0; j < kRows; ++j) {
      generic(i, j) = i == j ? 0.0 : dist(rng);
      generic_shifted(i, j) = generic(i, j) + e;
    }
  }
  auto g1 = embedding::CalibrateConditionals(generic, 15.0);
  auto g2 = embedding::CalibrateConditionals(generic_shifted, 15.0);
  if (g1.ok() && g2.ok()) {
    std::cerr << absl::StrFormat(
        "  [2] off-lattice doubles (not asserted): max|dp| %.3g\n",
        MaxAbsDiff(g1->conditional.values, g2->conditional.values));
  }
  return {p_diff <= 1e-12 && s_diff <= 1e-9,
          absl::StrFormat("%d rows, eta in [0, 1e6]: max|dp| %.3g <= 1e-12, "
                          "max rel|d sigma^2| %.3g <= 1e-9",
                          kRows, p_diff, s_diff)};
}

// ---------------------------------------------------------------------- 3

Outcome HomomorphicIdentities() {
  auto keys = ahe::GenerateKeyPair(1024);
  if (!keys.ok()) return {false, keys.status().ToString()};
  const auto& pk = keys->public_key;
  const auto& sk = keys->private_key;
  gmp_randclass rand(gmp_randinit_mt);
  rand.seed(11);
  const mpz_class n = pk.n();
  auto mod = [&](mpz_class v) {
    v %= n;
    if (v < 0) v += n;
    return v;
  };
  int add_ok = 0, sub_ok = 0, mul_ok = 0;
  constexpr int kSamples = 1000;
  for (int i = 0; i < kSamples; ++i) {
    const mpz_class a = rand.get_z_range(n), b = rand.get_z_range(n);
    auto ca = pk.Encrypt(a, 0);
    auto cb = pk.Encrypt(b, 0);
    if (!ca.ok() || !cb.ok()) return {false, "encryption failed"};
    auto sum = pk.Add(*ca, *cb);
    auto diff = pk.Sub(*ca, *cb);
    mpz_class k = rand.get_z_bits(96);
    if (i % 2 == 1) k = -k;
    auto prod = pk.ScalarMul(k, *ca);
    if (sum.ok() && sk.Decrypt(*sum).value_or(-1) == mod(a + b)) ++add_ok;
    if (diff.ok() && sk.Decrypt(*diff).value_or(-1) == mod(a - b)) ++sub_ok;
    if (prod.ok() && sk.Decrypt(*prod).value_or(-1) == mod(k * a)) ++mul_ok;
  }
  std::set<std::string> distinct;
  const mpz_class fixed = 42;
  for (int i = 0; i < kSamples; ++i) {
    auto c = pk.Encrypt(fixed, 0);
    if (c.ok()) distinct.insert(c->value.get_str(16));
  }
  const bool ok = add_ok == kSamples && sub_ok == kSamples && mul_ok == kSamples &&
                  distinct.size() >= 999;
  return {ok, absl::StrFormat("add %d/%d, sub %d/%d, scalar %d/%d exact; "
                              "%d/%d distinct encryptions of one plaintext (>= 999)",
                              add_ok, kSamples, sub_ok, kSamples, mul_ok, kSamples,
                              distinct.size(), kSamples)};
}

// ---------------------------------------------------------------------- 4

Outcome ViewAudit(const HonestRuns& honest) {
  int honest_ok = 0;
  for (const auto& r : honest.audits) honest_ok += r.passed() && r.warnings.empty();
  std::mt19937_64 rng(99);
  auto data = RandomTask(rng, 24, 4);
  protocol::TaskConfig c = cli::ConfigForDatasets(data, 5.0, 100, 512, 24);
  c.noise_seed = 5;
  auto oracle = protocol::RunPlaintextOracle(data, c, false);
  if (!oracle.ok()) return {false, oracle.status().ToString()};
  auto audit = [&](protocol::FaultInjection f) -> absl::StatusOr<protocol::AuditReport> {
    protocol::LocalRunOptions o;
    o.faults = f;
    auto run = protocol::RunLocalProtocol(data, c, o);
    if (!run.ok()) return run.status();
    return protocol::AssertViews(run->s_view, run->t_view, run->participant_views,
                                 run->ledger,
                                 {oracle->data_int, oracle->distances_int, data});
  };
  auto skip = audit({.skip_entry_noise = true});
  auto ident = audit({.identity_permutation = true});
  if (!skip.ok() || !ident.ok()) {
    return {false, (skip.ok() ? ident.status() : skip.status()).ToString()};
  }
  const bool skip_flagged = !skip->Find("a")->passed;
  bool ident_flagged = false;
  for (const auto& w : ident->warnings) {
    ident_flagged |= w.find("identity") != std::string::npos;
  }
  const bool ok = honest_ok == static_cast<int>(honest.audits.size()) &&
                  !honest.audits.empty() && skip_flagged && ident_flagged;
  return {ok, absl::StrFormat(
                  "honest runs clean %d/%d; skip-noise flags (a): %s; identity "
                  "permutation warns: %s",
                  honest_ok, honest.audits.size(), skip_flagged ? "yes" : "no",
                  ident_flagged ? "yes" : "no")};
}

// ---------------------------------------------------------------------- 5

double Purity(const RealMatrix& y, const std::vector<int>& truth) {
  // Lloyd's k-means, k = 3, best of 10 seeded restarts by inertia.
  const size_t n = y.rows();
  std::mt19937_64 rng(3);
  double best_inertia = INFINITY;
  std::vector<int> best;
  for (int restart = 0; restart < 10; ++restart) {
    std::vector<std::array<double, 2>> c(3);
    for (auto& ci : c) {
      const size_t k = rng() % n;
      ci = {y(k, 0), y(k, 1)};
    }
    std::vector<int> assign(n, 0);
    for (int it = 0; it < 100; ++it) {
      for (size_t i = 0; i < n; ++i) {
        double bd = INFINITY;
        for (int k = 0; k < 3; ++k) {
          const double d = std::hypot(y(i, 0) - c[k][0], y(i, 1) - c[k][1]);
          if (d < bd) bd = d, assign[i] = k;
        }
      }
      for (int k = 0; k < 3; ++k) {
        double sx = 0, sy = 0;
        int cnt = 0;
        for (size_t i = 0; i < n; ++i) {
          if (assign[i] == k) sx += y(i, 0), sy += y(i, 1), ++cnt;
        }
        if (cnt > 0) c[k] = {sx / cnt, sy / cnt};
      }
    }
    double inertia = 0;
    for (size_t i = 0; i < n; ++i) {
      inertia += std::pow(y(i, 0) - c[assign[i]][0], 2) + std::pow(y(i, 1) - c[assign[i]][1], 2);
    }
    if (inertia < best_inertia) best_inertia = inertia, best = assign;
  }
  int correct = 0;
  for (int k = 0; k < 3; ++k) {
    std::map<int, int> votes;
    for (size_t i = 0; i < n; ++i) {
      if (best[i] == k) ++votes[truth[i]];
    }
    int top = 0;
    for (const auto& [label, v] : votes) top = std::max(top, v);
    correct += top;
  }
  return static_cast<double>(correct) / n;
}

Outcome TsneQuality() {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr size_t kN = 150, kDims = 10;
  RealMatrix x(kN, kDims);
  std::vector<int> truth(kN);
  for (size_t i = 0; i < kN; ++i) {
    truth[i] = static_cast<int>(i % 3);
    for (size_t k = 0; k < kDims; ++k) {
      x(i, k) = g(rng) + (k == static_cast<size_t>(truth[i]) ? 10.0 : 0.0);
    }
  }
  embedding::TsneConfig cfg;
  cfg.perplexity = 30.0;
  cfg.init_seed = 1;
  auto cond = embedding::CalibrateConditionals(kernels::SquaredDistances(x), cfg.perplexity);
  if (!cond.ok()) return {false, cond.status().ToString()};
  auto p = embedding::Symmetrize(cond->conditional);
  if (!p.ok()) return {false, p.status().ToString()};
  auto r = embedding::RunTsne(*p, cfg);
  if (!r.ok()) return {false, r.status().ToString()};
  const double purity = Purity(r->y, truth);
  double worst_rise = -INFINITY;
  for (size_t t = cfg.exaggeration_iterations + 1; t < r->kl_trace.size(); ++t) {
    worst_rise = std::max(worst_rise, r->kl_trace[t] - r->kl_trace[t - 1]);
  }

  // Central differences of KL(P || Q(Y)) on random N = 8 instances.
  double worst_rel = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    constexpr size_t n = 8;
    RealMatrix pm(n, n), y(n, 2);
    double total = 0.0;
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) pm(i, j) = pm(j, i) = u(rng), total += 2 * pm(i, j);
    }
    for (double& v : pm.data()) v /= total;
    for (double& v : y.data()) v = g(rng);
    const auto kernel = kernels::ComputeStudentKernel(y);
    const RealMatrix grad = kernels::KlGradient(pm, 1.0, kernel, y);
    auto kl = [&](const RealMatrix& yy) {
      return embedding::KlDivergence(pm, embedding::ComputeLowDimAffinities(yy).q);
    };
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < y.data().size(); ++i) {
      constexpr double h = 1e-5;
      RealMatrix up = y, down = y;
      up.data()[i] += h;
      down.data()[i] -= h;
      const double fd = (kl(up) - kl(down)) / (2 * h);
      num = std::max(num, std::abs(fd - grad.data()[i]));
      den = std::max(den, std::abs(grad.data()[i]));
    }
    worst_rel = std::max(worst_rel, num / den);
  }
  const bool ok = purity >= 0.9 && worst_rise <= 1e-8 && worst_rel <= 1e-5;
  return {ok, absl::StrFormat("purity %.3f >= 0.9; max post-exaggeration KL rise %.3g "
                              "<= 1e-8; gradient vs finite differences %.3g <= 1e-5",
                              purity, worst_rise, worst_rel)};
}

// ---------------------------------------------------------------------- 6

class Process {
 public:
  Process(const std::vector<std::string>& argv, const fs::path& log) {
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_addopen(&fa, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&fa, 1, 2);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    if (posix_spawn(&pid_, args[0], &fa, nullptr, args.data(), environ) != 0) pid_ = -1;
    posix_spawn_file_actions_destroy(&fa);
  }
  ~Process() { Stop(); }
  bool ok() const { return pid_ > 0; }
  // Returns the exit status, or -1 on timeout.
  int Wait(std::chrono::seconds timeout) {
    const auto deadline = Clock::now() + timeout;
    while (pid_ > 0) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
        return exit_code_;
      }
      if (Clock::now() >= deadline) return -1;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return exit_code_;
  }
  void Stop() {
    if (pid_ <= 0) return;
    kill(pid_, SIGTERM);
    if (Wait(std::chrono::seconds(5)) == -1 && pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

 private:
  pid_t pid_ = -1;
  int exit_code_ = -1;
};

int FreePort() {
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  close(fd);
  return ntohs(addr.sin_port);
}

int StepOf(const std::string& status) {
  if (status == "Preparing") return 0;
  if (status == "Complete") return 9;
  int k = -1;
  if (std::sscanf(status.c_str(), "Running(%d)", &k) == 1) return k;
  return -1;
}

Outcome Lifecycle(const std::string& jtsne) {
  if (jtsne.empty()) return {false, "no --jtsne binary given"};
  const fs::path dir = fs::temp_directory_path() / absl::StrCat("jtsne_accept_", getpid());
  fs::create_directories(dir);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<std::string> cells;
  for (const char* who : {"alice", "bob"}) {
    std::ofstream out(dir / absl::StrCat(who, ".csv"));
    out << "a,b,c,d\n";
    for (int i = 0; i < 12; ++i) {
      std::vector<std::string> row;
      for (int k = 0; k < 4; ++k) {
        row.push_back(absl::StrFormat("%.6f", g(rng) + (who[0] == 'b' ? 2.0 : 0.0)));
        cells.push_back(row.back());
      }
      out << absl::StrJoin(row, ",") << "\n";
    }
  }
  const int port = FreePort();
  const std::string url = absl::StrCat("http://127.0.0.1:", port);
  const fs::path journal = dir / "journal.jsonl";
  Process coordinator({jtsne, "run", "--role", "coordinator", "--listen",
                       absl::StrCat("127.0.0.1:", port), "--journal", journal.string()},
                      dir / "coordinator.log");
  net::CoordinatorClient client(url, std::chrono::seconds(10));
  absl::Status up = absl::UnavailableError("coordinator did not start");
  for (int i = 0; i < 200 && !up.ok(); ++i) {
    up = client.ListTasks().status();
    if (!up.ok()) std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  if (!up.ok()) return {false, up.ToString()};

  protocol::TaskConfig c;
  c.participants = {{"alice", 12}, {"bob", 12}};
  c.dims = 4;
  c.tsne.perplexity = 5.0;
  c.tsne.iterations = 300;
  c.key_bits = 512;
  c.value_bound = 8.0;
  auto rec = client.Propose(c.ToJson(), "acceptance");
  if (!rec.ok()) return {false, rec.status().ToString()};
  const std::string task = rec->at("task_id");

  Process s({jtsne, "--coordinator", url, "run", "--role", "collab-s", "--max-tasks", "1"},
            dir / "s.log");
  Process t({jtsne, "--coordinator", url, "run", "--role", "collab-t", "--task", task},
            dir / "t.log");
  Process pa({jtsne, "--coordinator", url, "run", "--role", "participant", "--task", task,
              "--data", (dir / "alice.csv").string(), "--out", (dir / "alice.json").string()},
             dir / "alice.log");
  Process pb({jtsne, "--coordinator", url, "run", "--role", "participant", "--task", task,
              "--data", (dir / "bob.csv").string(), "--out", (dir / "bob.json").string()},
             dir / "bob.log");
  if (!s.ok() || !t.ok() || !pa.ok() || !pb.ok()) return {false, "spawn failed"};

  // Poll while the participants run; every observed step must be >= the last.
  std::vector<int> observed;
  const auto deadline = Clock::now() + std::chrono::minutes(5);
  int exit_a = -2, exit_b = -2;
  while (Clock::now() < deadline && (exit_a == -2 || exit_b == -2)) {
    if (auto r = client.GetTask(task); r.ok()) {
      const int step = StepOf(r->at("status"));
      if (observed.empty() || observed.back() != step) observed.push_back(step);
    }
    if (exit_a == -2 && (exit_a = pa.Wait(std::chrono::seconds(0))) == -1) exit_a = -2;
    if (exit_b == -2 && (exit_b = pb.Wait(std::chrono::seconds(0))) == -1) exit_b = -2;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  auto final_rec = client.GetTask(task);
  t.Stop();
  s.Stop();
  coordinator.Stop();
  if (!final_rec.ok()) return {false, final_rec.status().ToString()};

  std::vector<int> history;
  for (const auto& h : final_rec->at("history")) history.push_back(StepOf(h.at("status")));
  std::vector<int> expected(10);
  for (int k = 0; k < 10; ++k) expected[k] = k;
  const bool strict = history == expected;
  const bool polled_monotone = std::is_sorted(observed.begin(), observed.end()) &&
                               std::adjacent_find(observed.begin(), observed.end()) ==
                                   observed.end();

  std::ifstream in(journal);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  int leaks = 0;
  for (const auto& cell : cells) leaks += text.find(cell) != std::string::npos;
  const bool long_hex = std::regex_search(text, std::regex("[0-9a-fA-F]{96}"));
  const bool seed = text.find("noise_seed") != std::string::npos;
  bool journal_monotone = true;
  int last = -1;
  for (absl::string_view line : absl::StrSplit(text, '\n', absl::SkipEmpty())) {
    const auto j = nlohmann::json::parse(std::string(line), nullptr, false);
    if (j.is_discarded() || j.value("task", nlohmann::json::object()).value("task_id", "") != task) continue;
    const int step = StepOf(j["task"]["status"]);
    journal_monotone &= step >= last;
    last = step;
  }
  const bool artifacts = fs::exists(dir / "alice.json") && fs::exists(dir / "bob.json");
  const bool ok = exit_a == 0 && exit_b == 0 && strict && polled_monotone && journal_monotone && leaks == 0 && !long_hex &&
                  !seed && artifacts && final_rec->at("status") == "Complete";
  std::string obs;
  for (int v : observed) absl::StrAppend(&obs, obs.empty() ? "" : ",", v);
  if (ok) fs::remove_all(dir);
  return {ok, absl::StrFormat(
                  "5 processes, participants exit %d/%d; history Preparing..Running(8)..Complete strict: %s; polled "
                  "steps [%s] monotone: %s; journal: %d data values, %s ciphertext-sized "
                  "hex, %s seed%s",
                  exit_a, exit_b, strict ? "yes" : "no", obs, polled_monotone ? "yes" : "no", leaks,
                  long_hex ? "has" : "no", seed ? "has" : "no",
                  ok ? "" : absl::StrCat(" (logs in ", dir.string(), ")"))};
}

// ---------------------------------------------------------------------- 7

Outcome BenchShape(const std::string& jtsne) {
  if (jtsne.empty()) return {false, "no --jtsne binary given"};
  const fs::path out = fs::temp_directory_path() / absl::StrCat("jtsne_bench_", getpid(), ".csv");
  Process p({jtsne, "bench", "--points", "32", "--dims", "9", "--iterations", "100",
             "--out", out.string()},
            fs::temp_directory_path() / absl::StrCat("jtsne_bench_", getpid(), ".log"));
  const int rc = p.Wait(std::chrono::seconds(300));
  std::ifstream in(out);
  const std::string csv((std::istreambuf_iterator<char>(in)), {});
  fs::remove(out);
  std::vector<std::string> lines = absl::StrSplit(csv, '\n', absl::SkipEmpty());
  bool ok = rc == 0 && lines.size() == 8 && lines[0] == "step,seconds,bytes,reference_seconds";
  std::vector<int> steps;
  for (size_t i = 1; ok && i < lines.size(); ++i) {
    std::vector<std::string> f = absl::StrSplit(lines[i], ',');
    ok = f.size() == 4 && std::stod(f[1]) >= 0.0 &&
         std::stod(f[3]) == cli::kReferenceStepSeconds[i - 1];
    steps.push_back(std::stoi(f[0]));
  }
  ok = ok && steps == std::vector<int>{2, 3, 4, 5, 6, 7, 8};
  return {ok, absl::StrFormat("exit %d; %d rows for steps 2..8 with reference seconds "
                              "0.1,0.1,10.4,13.3,11.0,3.1,0.7 (reported, not asserted)",
                              rc, lines.empty() ? 0 : lines.size() - 1)};
}

// ---------------------------------------------------------------------- 8

Outcome Conservation() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_mass = 0.0, worst_linear = 0.0;
  bool grid_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 20 + rng() % 300, owners = 2 + rng() % 3;
    std::vector<aggregate::Point2> pts(n);
    std::vector<size_t> owner(n);
    for (size_t i = 0; i < n; ++i) {
      owner[i] = rng() % owners;
      pts[i] = {g(rng) * 30 + 20.0 * owner[i], g(rng) * 30};
    }
    auto bounds = aggregate::BoundingBox(pts, 5.0);
    if (!bounds.ok()) return {false, bounds.status().ToString()};
    const double bw = aggregate::ScottBandwidth(pts);
    const int res = 64 + 32 * (trial % 3);
    auto global = aggregate::KdeDensity(pts, *bounds, bw, res);
    if (!global.ok()) return {false, global.status().ToString()};
    worst_mass = std::max(worst_mass, std::abs(global->Mass() - n) / n);
    RealMatrix sum(res, res);
    std::vector<std::string> names;
    for (size_t o = 0; o < owners; ++o) {
      names.push_back(absl::StrCat("o", o));
      std::vector<aggregate::Point2> mine;
      for (size_t i = 0; i < n; ++i) {
        if (owner[i] == o) mine.push_back(pts[i]);
      }
      auto part = aggregate::KdeDensity(mine, *bounds, bw, res, names.back());
      if (!part.ok()) return {false, part.status().ToString()};
      for (size_t k = 0; k < sum.data().size(); ++k) sum.data()[k] += part->grid.data()[k];
    }
    double peak = 0.0;
    for (double v : global->grid.data()) peak = std::max(peak, std::abs(v));
    worst_linear = std::max(worst_linear, MaxAbsDiff(sum, global->grid) / peak);
    auto grid = aggregate::ComputeGridCounts(pts, owner, names, *bounds, 20);
    grid_ok &= grid.ok() && grid->Total() == n;
  }
  const bool ok = worst_mass <= 1e-6 && grid_ok && worst_linear <= 1e-9;
  return {ok, absl::StrFormat("20 rasters: max rel |mass - N| %.3g <= 1e-6; grid totals == "
                              "N: %s; per-owner sum vs global %.3g <= 1e-9 (relative to peak)",
                              worst_mass, grid_ok ? "yes" : "no", worst_linear)};
}

}  // namespace
}  // namespace jtsne::acceptance

int main(int argc, char** argv) {
  using namespace jtsne::acceptance;
  std::string jtsne;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--jtsne" && i + 1 < argc) {
      jtsne = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      for (absl::string_view v : absl::StrSplit(argv[++i], ',')) only.insert(std::stoi(std::string(v)));
    } else {
      std::cerr << "usage: acceptance --jtsne <binary> [--only 1,2,...]\n";
      return 2;
    }
  }
  HonestRuns honest;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"secure pipeline exactness", [&] { return Exactness(honest); }},
      {"row-shift cancellation", RowShiftCancellation},
      {"homomorphic identities", HomomorphicIdentities},
      {"view-security audit", [&] { return ViewAudit(honest); }},
      {"t-SNE quality", TsneQuality},
      {"protocol lifecycle over processes", [&] { return Lifecycle(jtsne); }},
      {"bench harness shape", [&] { return BenchShape(jtsne); }},
      {"aggregation conservation", Conservation},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    // Criterion 4 reuses the honest runs of criterion 1.
    if (!only.empty() && !only.contains(id) && !(id == 1 && only.contains(4))) continue;
    const auto start = Clock::now();
    Outcome o = criteria[i].second();
    failed += !o.passed;
    std::cout << absl::StrFormat("%s %d %s: %s [%.1f s]", o.passed ? "PASS" : "FAIL", id,
                                 criteria[i].first, o.summary, Seconds(start))
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
