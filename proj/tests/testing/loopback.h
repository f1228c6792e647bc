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

#ifndef JTSNE_TESTS_TESTING_LOOPBACK_H_
#define JTSNE_TESTS_TESTING_LOOPBACK_H_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/statusor.h"
#include "jtsne/net/coordinator.h"
#include "jtsne/net/runners.h"

namespace jtsne::testing {

// Coordinator, S, T and one thread per participant, all on 127.0.0.1.
struct LoopbackRun {
  std::string task_id;
  nlohmann::json record;
  std::vector<absl::StatusOr<net::ParticipantOutcome>> participants;
  absl::Status s_status;
  absl::Status t_status;
  std::shared_ptr<const protocol::CollaboratorS> s;
  std::shared_ptr<const protocol::CollaboratorT> t;
  std::string journal;  // full journal text
};

inline absl::StatusOr<LoopbackRun> RunLoopback(
    const std::vector<protocol::Dataset>& data, protocol::TaskConfig config,
    const ahe::KeyPair& keys, const std::filesystem::path& journal_path,
    protocol::FaultInjection faults = {}) {
  std::filesystem::remove(journal_path);
  net::CoordinatorOptions copts;
  copts.registry.journal_path = journal_path.string();
  net::CoordinatorServer coordinator(copts);
  if (auto s = coordinator.Start({"127.0.0.1", 0}); !s.ok()) return s;

  net::NodeOptions base;
  base.coordinator_url = coordinator.url();
  base.step_timeout = std::chrono::minutes(5);
  base.audit = true;
  net::NodeOptions s_opts = base;
  s_opts.keys = keys;
  net::NodeOptions t_opts = base;
  t_opts.noise_seed = config.noise_seed;
  t_opts.faults = faults;
  net::CollaboratorNode s_node(net::Role::kS, s_opts);
  net::CollaboratorNode t_node(net::Role::kT, t_opts);
  if (auto s = s_node.Start(); !s.ok()) return s;
  if (auto s = t_node.Start(); !s.ok()) return s;

  net::CoordinatorClient client(coordinator.url());
  auto rec = client.Propose(config.ToJson(), data.front().owner_id);
  if (!rec.ok()) return rec.status();
  LoopbackRun run;
  run.task_id = rec->at("task_id");
  run.participants.resize(data.size(), absl::UnknownError("not run"));

  std::thread s_thread([&] { run.s_status = s_node.RunTask(run.task_id); });
  std::thread t_thread([&] { run.t_status = t_node.RunTask(run.task_id); });
  std::vector<std::thread> ps;
  for (size_t i = 0; i < data.size(); ++i) {
    ps.emplace_back([&, i] {
      run.participants[i] = net::RunParticipant(run.task_id, data[i], base);
    });
  }
  for (auto& p : ps) p.join();
  s_thread.join();
  t_thread.join();
  auto final_rec = client.GetTask(run.task_id);
  if (!final_rec.ok()) return final_rec.status();
  run.record = *final_rec;
  run.s = s_node.s_state(run.task_id);
  run.t = t_node.t_state(run.task_id);
  s_node.Stop();
  t_node.Stop();
  coordinator.Stop();
  std::ifstream in(journal_path);
  run.journal.assign(std::istreambuf_iterator<char>(in), {});
  return run;
}

}  // namespace jtsne::testing

#endif  // JTSNE_TESTS_TESTING_LOOPBACK_H_
