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

#include <gmpxx.h>
#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jtsne/ahe/fixed_point.h"
#include "jtsne/kernels/crypto.h"
#include "jtsne/kernels/distance.h"
#include "jtsne/protocol/audit.h"
#include "jtsne/protocol/driver.h"
#include "jtsne/protocol/messages.h"
#include "jtsne/protocol/oracle.h"
#include "jtsne/protocol/roles.h"
#include "testing/fixtures.h"

namespace jtsne::protocol {
namespace {

using ::jtsne::testing::DyadicDatasets;
using ::jtsne::testing::SmallConfig;

const std::vector<std::pair<std::string, size_t>> kOwners = {{"alice", 7},
                                                             {"bob", 9}};

class ProtocolTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto kp = ahe::GenerateKeyPair(ahe::kTestKeyBits);
    ASSERT_TRUE(kp.ok());
    keys_ = new ahe::KeyPair(*std::move(kp));
  }
  static void TearDownTestSuite() { delete keys_; }

  static TaskConfig Config(uint64_t seed = 1) {
    return SmallConfig(kOwners, 4, 4.0, 200, seed);
  }
  static LocalRunOptions Options(FaultInjection faults = {}) {
    LocalRunOptions o;
    o.keys = *keys_;
    o.faults = faults;
    return o;
  }
  static AuditTruth Truth(const std::vector<Dataset>& data,
                          const TaskConfig& config) {
    auto oracle = RunPlaintextOracle(data, config, /*run_tsne=*/false);
    EXPECT_TRUE(oracle.ok());
    return {oracle->data_int, oracle->distances_int, data};
  }
  mpz_class Decrypt(const ahe::Ciphertext& c) const {
    auto v = keys_->private_key.Decrypt(c);
    EXPECT_TRUE(v.ok());
    auto codec = ahe::FixedPointCodec::Create(24, keys_->public_key.n());
    return codec->ToSigned(*v);
  }

  static ahe::KeyPair* keys_;
};

ahe::KeyPair* ProtocolTest::keys_ = nullptr;

// ------------------------------------------------------------------ config

TEST(TaskConfigTest, RejectsLargePerplexity) {
  TaskConfig c = SmallConfig({{"a", 10}, {"b", 5}}, 3, 5.0, 100, 1);
  EXPECT_FALSE(c.Validate().ok());  // (15 - 1) / 3 < 5
  c.tsne.perplexity = 4.0;
  EXPECT_TRUE(c.Validate().ok());
}

TEST(TaskConfigTest, ListsEveryFieldProblem) {
  TaskConfig c = SmallConfig({{"a", 10}, {"a", 0}}, 0, 2.0, 100, 1);
  c.scale_bits = 0;
  const absl::Status s = c.Validate();
  ASSERT_FALSE(s.ok());
  const std::string msg(s.message());
  EXPECT_NE(msg.find("duplicate id"), std::string::npos);
  EXPECT_NE(msg.find("count 0"), std::string::npos);
  EXPECT_NE(msg.find("dims"), std::string::npos);
  EXPECT_NE(msg.find("scale_bits"), std::string::npos);
}

TEST(TaskConfigTest, OverflowBudgetDependsOnKeySize) {
  TaskConfig c = SmallConfig(kOwners, 4, 4.0, 100, 1);
  c.value_bound = 1e70;
  EXPECT_EQ(c.CheckOverflowBudget(512).code(), absl::StatusCode::kOutOfRange);
  EXPECT_TRUE(c.CheckOverflowBudget(2048).ok());
  c.value_bound = 1e4;
  EXPECT_TRUE(c.CheckOverflowBudget(512).ok());
}

TEST(TaskConfigTest, JsonRoundTrip) {
  TaskConfig c = SmallConfig(kOwners, 4, 4.0, 100, 7);
  c.mode = VisualizationMode::kScatterplot;
  c.title = "demo";
  auto back = TaskConfig::FromJson(c.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->ToJson(), c.ToJson());
  EXPECT_EQ(back->participants, c.participants);
  EXPECT_FALSE(TaskConfig::FromJson(nlohmann::json{{"dims", 3}}).ok());
}

// ---------------------------------------------------------------- messages

TEST_F(ProtocolTest, MessagesRoundTrip) {
  std::vector<ahe::Ciphertext> cts;
  for (int i = 0; i < 6; ++i) cts.push_back(*keys_->public_key.Encrypt(i, 2));
  auto cm = CiphertextMatrix::From(2, 3, cts);
  ASSERT_TRUE(cm.ok());
  const NoisedDistances nd{*cm};
  auto nd2 = NoisedDistances::Decode(nd.Encode());
  ASSERT_TRUE(nd2.ok());
  EXPECT_EQ(nd2->matrix.values, cm->values);
  EXPECT_EQ(nd2->matrix.level, 2);
  EXPECT_EQ(nd2->matrix.key_id, keys_->public_key.key_id());

  const KeyBroadcast kb{keys_->public_key.ToJson(), Config()};
  auto kb2 = KeyBroadcast::Decode(kb.Encode());
  ASSERT_TRUE(kb2.ok());
  EXPECT_EQ(kb2->public_key, kb.public_key);
  EXPECT_EQ(kb2->config.ToJson(), kb.config.ToJson());

  DataUpload up{"alice", *cm, {std::string("x"), std::nullopt}};
  auto up2 = DataUpload::Decode(up.Encode());
  ASSERT_TRUE(up2.ok());
  EXPECT_EQ(up2->owner_id, "alice");
  EXPECT_EQ(up2->labels, up.labels);

  ProbMatrix pm{RealMatrix(2, 2, std::vector<double>{0, 0.25, 0.25, 0})};
  EXPECT_EQ(ProbMatrix::Decode(pm.Encode())->values, pm.values);
  ArtifactRequest req{"tok", "alice", "density"};
  EXPECT_EQ(ArtifactRequest::Decode(req.Encode())->kind, "density");
  ArtifactResponse resp{403, "no"};
  EXPECT_EQ(ArtifactResponse::Decode(resp.Encode())->status, 403);
  EXPECT_EQ(EmbeddingResult::Decode(EmbeddingResult{"{}"}.Encode())->artifact_json,
            "{}");
}

TEST_F(ProtocolTest, MessageDecodeRejectsTruncationAndTrailingBytes) {
  std::vector<ahe::Ciphertext> cts(4, *keys_->public_key.Encrypt(1, 1));
  const NoisedData nd{*CiphertextMatrix::From(2, 2, cts)};
  const std::string bytes = nd.Encode();
  for (size_t cut : {size_t{0}, size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_FALSE(NoisedData::Decode(bytes.substr(0, cut)).ok()) << cut;
  }
  EXPECT_FALSE(NoisedData::Decode(bytes + "x").ok());
  EXPECT_FALSE(ProbMatrix::Decode("\0\0\0\1\0\0\0\1abc").ok());
}

// ------------------------------------------------------------------- steps

TEST_F(ProtocolTest, Step1GivesEveryRoleThePublicKeyOnly) {
  CollaboratorS s(Config(), true);
  auto kb = s.KeyGenBroadcast(*keys_);
  ASSERT_TRUE(kb.ok());
  CollaboratorT t(true);
  ASSERT_TRUE(t.ReceiveKey(*kb).ok());
  const std::string wire = kb->Encode();
  EXPECT_EQ(wire, KeyBroadcast::Decode(wire)->Encode());
  // The broadcast carries n and g only.
  EXPECT_EQ(kb->public_key.size(), 2u);
  EXPECT_TRUE(t.transcript().entries().empty());
}

TEST_F(ProtocolTest, Step2UploadDecryptsToInput) {
  TaskConfig c = SmallConfig({{"solo", 1}, {"other", 9}}, 2, 2.0, 10, 1);
  Participant p(Dataset{"solo", RealMatrix(1, 2, 0.0), {}}, true);
  const KeyBroadcast kb{keys_->public_key.ToJson(), c};
  auto up = p.EncryptUpload(kb);
  ASSERT_TRUE(up.ok());
  ASSERT_EQ(up->rows.values.size(), 2u);
  for (const auto& ct : up->rows.ToCiphertexts()) EXPECT_EQ(Decrypt(ct), 0);

  const auto data = DyadicDatasets({{"alice", 10}}, 3, 5);
  TaskConfig c2 = SmallConfig({{"alice", 10}}, 3, 2.0, 10, 1);
  Participant q(data[0], true);
  auto up2 = q.EncryptUpload(KeyBroadcast{keys_->public_key.ToJson(), c2});
  ASSERT_TRUE(up2.ok());
  const auto cts = up2->rows.ToCiphertexts();
  for (size_t i = 0; i < cts.size(); ++i) {
    EXPECT_EQ(Decrypt(cts[i]),
              mpz_class(std::ldexp(data[0].points.data()[i], 24)));
  }
}

TEST_F(ProtocolTest, Step2RejectsWrongDimension) {
  TaskConfig c = Config();
  Participant p(Dataset{"alice", RealMatrix(7, 5, 0.0), {}}, false);
  auto up = p.EncryptUpload(KeyBroadcast{keys_->public_key.ToJson(), c});
  ASSERT_FALSE(up.ok());
  EXPECT_NE(std::string(up.status().message()).find("dimension 5"),
            std::string::npos);
  EXPECT_NE(std::string(up.status().message()).find("dimension 4"),
            std::string::npos);
}

TEST_F(ProtocolTest, Step3NoiseIsRecordedAndFresh) {
  const auto data = DyadicDatasets(kOwners, 4, 2);
  TaskConfig c = Config();
  c.noise_seed.reset();
  auto r1 = RunLocalProtocol(data, c, Options());
  auto r2 = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r1.ok() && r2.ok()) << r1.status();
  EXPECT_NE(r1->ledger.sigma, r2->ledger.sigma);
  const AuditTruth truth = Truth(data, c);
  const auto seen = r1->s_view.Find(4, kDecrypted);
  ASSERT_EQ(seen.size(), 1u);
  for (size_t i = 0; i < truth.data_int.size(); ++i) {
    EXPECT_EQ(seen[0]->integers[i] - r1->ledger.sigma.data()[i],
              truth.data_int.data()[i]);
  }
}

TEST_F(ProtocolTest, Step3ZeroNoiseExposesExactData) {
  const auto data = DyadicDatasets(kOwners, 4, 3);
  const TaskConfig c = Config();
  auto r = RunLocalProtocol(data, c, Options({.skip_entry_noise = true}));
  ASSERT_TRUE(r.ok());
  const AuditTruth truth = Truth(data, c);
  EXPECT_EQ(r->s_view.Find(4, kDecrypted)[0]->integers, truth.data_int.data());
}

TEST(Step4Test, NoisedDistanceOfKnownPoints) {
  Matrix<mpz_class> pts(2, 2, std::vector<mpz_class>{1, 2, 4, 6});
  const auto z = kernels::SquaredDistances(pts);
  EXPECT_EQ(z(0, 1), 25);
  EXPECT_EQ(z(1, 0), 25);
  EXPECT_EQ(z(0, 0), 0);
}

TEST_F(ProtocolTest, Step5RecoversExactDistances) {
  const std::vector<std::pair<std::string, size_t>> owners = {{"a", 3}, {"b", 5}};
  const auto data = DyadicDatasets(owners, 4, 4);
  TaskConfig c = SmallConfig(owners, 4, 2.0, 50, 4);
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok()) << r.status();
  const AuditTruth truth = Truth(data, c);
  EXPECT_EQ(r->distances_int, truth.distances_int);
  for (size_t i = 0; i < 8; ++i) EXPECT_EQ(r->distances_int(i, i), 0);
}

TEST_F(ProtocolTest, Step5WithZeroNoiseEqualsZ) {
  const auto data = DyadicDatasets(kOwners, 4, 5);
  const TaskConfig c = Config();
  auto r = RunLocalProtocol(data, c, Options({.skip_entry_noise = true}));
  ASSERT_TRUE(r.ok());
  const auto seen = r->s_view.Find(4, kDecrypted)[0];
  const Matrix<mpz_class> z = kernels::SquaredDistances(
      Matrix<mpz_class>(seen->rows, seen->cols, seen->integers));
  EXPECT_EQ(r->distances_int, z);
}

TEST_F(ProtocolTest, Step6BlindingMatchesLedger) {
  const auto data = DyadicDatasets(kOwners, 4, 6);
  const TaskConfig c = Config();
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok());
  const auto w = r->s_view.Find(7, kDecrypted)[0];
  const size_t n = 16;
  ASSERT_TRUE(IsPermutation(r->ledger.pi));
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = 0; b < n; ++b) {
      const mpz_class& v = w->integers[a * n + b];
      if (a == b) {
        EXPECT_EQ(v, 0);
      } else {
        EXPECT_EQ(v - r->ledger.eta[r->ledger.pi[a]],
                  r->distances_int(r->ledger.pi[a], r->ledger.pi[b]));
      }
    }
  }
}

TEST_F(ProtocolTest, Step6DegenerateBlindingShowsD) {
  const auto data = DyadicDatasets(kOwners, 4, 7);
  auto r = RunLocalProtocol(
      data, Config(),
      Options({.identity_permutation = true, .zero_row_noise = true}));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->s_view.Find(7, kDecrypted)[0]->integers, r->distances_int.data());
}

TEST_F(ProtocolTest, Step7MatchesOracleUnderPermutation) {
  const auto data = DyadicDatasets(kOwners, 4, 8);
  const TaskConfig c = Config();
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok());
  auto oracle = RunPlaintextOracle(data, c, false);
  ASSERT_TRUE(oracle.ok());
  const auto m_prime = r->t_view.Find(8, kReceivedPlaintext)[0];
  const RealMatrix mp(16, 16, m_prime->reals);
  const RealMatrix want = ConjugatePermute(oracle->p.values, r->ledger.pi);
  double total = 0.0;
  for (size_t i = 0; i < mp.size(); ++i) {
    EXPECT_NEAR(mp.data()[i], want.data()[i], 1e-9);
    total += mp.data()[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(r->m.values, oracle->p.values);
  EXPECT_EQ(r->unconverged_rows, 0);
}

TEST_F(ProtocolTest, Step8IdentityPermutationLeavesMUnchanged) {
  const auto data = DyadicDatasets(kOwners, 4, 9);
  auto r = RunLocalProtocol(data, Config(),
                            Options({.identity_permutation = true}));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->t_view.Find(8, kReceivedPlaintext)[0]->reals, r->m.values.data());
}

TEST(ConjugationTest, UnpermuteInvertsPermute) {
  std::mt19937_64 rng(10);
  std::vector<size_t> pi(12);
  std::iota(pi.begin(), pi.end(), size_t{0});
  std::shuffle(pi.begin(), pi.end(), rng);
  RealMatrix m(12, 12);
  std::uniform_real_distribution<double> u;
  for (double& v : m.data()) v = u(rng);
  EXPECT_EQ(ConjugateUnpermute(ConjugatePermute(m, pi), pi), m);
  EXPECT_EQ(ConjugatePermute(ConjugateUnpermute(m, pi), pi), m);
  NoiseLedger l;
  l.pi = pi;
  const auto inv = l.InversePermutation();
  for (size_t a = 0; a < 12; ++a) EXPECT_EQ(inv[pi[a]], a);
}

TEST(AffinityEquivarianceTest, ConjugatePermutedDistancesGivePermutedP) {
  const auto data = DyadicDatasets({{"a", 20}}, 3, 11);
  const TaskConfig c = SmallConfig({{"a", 20}}, 3, 5.0, 10, 11);
  auto oracle = RunPlaintextOracle(data, c, false);
  ASSERT_TRUE(oracle.ok());
  std::vector<size_t> pi(20);
  std::iota(pi.begin(), pi.end(), size_t{0});
  std::shuffle(pi.begin(), pi.end(), std::mt19937_64(3));
  auto cal = embedding::CalibrateConditionals(
      ConjugatePermute(oracle->distances, pi), 5.0);
  ASSERT_TRUE(cal.ok());
  auto p = embedding::Symmetrize(cal->conditional);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->values, ConjugatePermute(oracle->p.values, pi));
}

TEST_F(ProtocolTest, EndToEndMatchesOracleEmbedding) {
  const auto data = DyadicDatasets(kOwners, 4, 12);
  const TaskConfig c = Config(12);
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok());
  auto oracle = RunPlaintextOracle(data, c);
  ASSERT_TRUE(oracle.ok());
  ASSERT_EQ(r->tsne.y.size(), oracle->tsne.y.size());
  for (size_t i = 0; i < r->tsne.y.size(); ++i) {
    EXPECT_NEAR(r->tsne.y.data()[i], oracle->tsne.y.data()[i], 1e-6);
  }
  ASSERT_EQ(r->participant_results.size(), 2u);
  // Density mode: each participant sees only its own points.
  for (size_t p = 0; p < 2; ++p) {
    const auto& view = r->participant_results[p];
    EXPECT_EQ(view.points.size(), kOwners[p].second);
    for (const auto& pt : view.points) EXPECT_EQ(pt.owner_id, kOwners[p].first);
    EXPECT_EQ(view.grid.Total(), 16u);
  }
}

TEST(TaskConfigTest, NormalizationValidationAndJson) {
  TaskConfig c = SmallConfig(kOwners, 2, 4.0, 50, 1);
  c.normalization = {{0.0, 10.0}};
  auto s = c.Validate();
  EXPECT_NE(s.message().find("normalization: 1 ranges for 2 dimensions"), std::string::npos);
  c.normalization = {{0.0, 10.0}, {3.0, 3.0}};
  EXPECT_NE(c.Validate().message().find("finite lo < hi"), std::string::npos);
  c.normalization = {{0.0, 10.0}, {-4.0, 4.0}};
  ASSERT_TRUE(c.Validate().ok());
  auto back = TaskConfig::FromJson(c.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->normalization, c.normalization);
  EXPECT_FALSE(TaskConfig().ToJson().contains("normalization"));
}

TEST(TaskConfigTest, NormalizeMapsToUnitIntervalAndRejectsOutliers) {
  TaskConfig c;
  c.normalization = {{0.0, 10.0}, {-4.0, 4.0}};
  RealMatrix x(2, 2, std::vector<double>{0.0, -4.0, 7.5, 2.0});
  auto n = c.Normalize(x);
  ASSERT_TRUE(n.ok());
  EXPECT_EQ((*n)(0, 0), 0.0);
  EXPECT_EQ((*n)(0, 1), 0.0);
  EXPECT_EQ((*n)(1, 0), 0.75);
  EXPECT_EQ((*n)(1, 1), 0.75);
  x(1, 0) = 10.5;
  EXPECT_EQ(c.Normalize(x).status().code(), absl::StatusCode::kOutOfRange);
}

TEST_F(ProtocolTest, NormalizedRunMatchesNormalizedOracle) {
  auto data = DyadicDatasets(kOwners, 4, 21);
  TaskConfig c = Config(21);
  c.normalization.assign(4, {-8.0, 8.0});
  c.value_bound = 1.0;
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok()) << r.status();
  auto oracle = RunPlaintextOracle(data, c);
  ASSERT_TRUE(oracle.ok());
  for (size_t i = 0; i < r->tsne.y.size(); ++i) {
    EXPECT_NEAR(r->tsne.y.data()[i], oracle->tsne.y.data()[i], 1e-6);
  }
  // Distances shrink by the squared range width, up to fixed-point rounding.
  c.normalization.clear();
  c.value_bound = 8.0;
  auto raw = RunPlaintextOracle(data, c, false);
  ASSERT_TRUE(raw.ok());
  EXPECT_NEAR(oracle->distances(0, 1) * 256.0, raw->distances(0, 1), 1e-4);
}

// ------------------------------------------------------------------- oracle

TEST(OracleTest, KnownDistances) {
  Dataset d{"a", RealMatrix(4, 2, std::vector<double>{0, 0, 3, 0, 0, 4, 0, 0}), {}};
  TaskConfig c = SmallConfig({{"a", 4}}, 2, 0.9, 10, 1);
  c.scale_bits = 4;
  c.value_bound = 10;
  auto r = RunPlaintextOracle({d}, c, false);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->distances(0, 1), 9.0);
  EXPECT_EQ(r->distances(0, 2), 16.0);
  EXPECT_EQ(r->distances(1, 2), 25.0);
  EXPECT_EQ(r->distances(0, 3), 0.0);
  EXPECT_EQ(r->distances_int(1, 2), 25 * 256);
}

TEST(OracleTest, ConditionalRowsAndJointMassNormalize) {
  const auto data = DyadicDatasets({{"a", 25}}, 3, 13);
  auto r = RunPlaintextOracle(data, SmallConfig({{"a", 25}}, 3, 5.0, 10, 1), false);
  ASSERT_TRUE(r.ok());
  auto cond = embedding::ConditionalProbabilities(r->distances, r->bandwidths);
  ASSERT_TRUE(cond.ok());
  for (size_t i = 0; i < 25; ++i) {
    double s = 0;
    for (double v : cond->values.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  double total = 0;
  for (double v : r->p.values.data()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

// -------------------------------------------------------------------- audit

TEST_F(ProtocolTest, AuditPassesOnHonestRun) {
  const auto data = DyadicDatasets(kOwners, 4, 14);
  const TaskConfig c = Config(14);
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok());
  const AuditReport rep = AssertViews(r->s_view, r->t_view, r->participant_views,
                                      r->ledger, Truth(data, c));
  EXPECT_TRUE(rep.passed()) << rep.ToJson().dump(2);
  EXPECT_TRUE(rep.warnings.empty());
}

TEST_F(ProtocolTest, AuditFlagsSkippedEntryNoise) {
  const auto data = DyadicDatasets(kOwners, 4, 15);
  const TaskConfig c = Config(15);
  auto r = RunLocalProtocol(data, c, Options({.skip_entry_noise = true}));
  ASSERT_TRUE(r.ok());
  const AuditReport rep = AssertViews(r->s_view, r->t_view, r->participant_views,
                                      r->ledger, Truth(data, c));
  EXPECT_FALSE(rep.Find("a")->passed);
  EXPECT_TRUE(rep.Find("b")->passed);
  EXPECT_FALSE(rep.passed());
}

TEST_F(ProtocolTest, AuditWarnsOnIdentityPermutationAndZeroRowNoise) {
  const auto data = DyadicDatasets(kOwners, 4, 16);
  const TaskConfig c = Config(16);
  auto r = RunLocalProtocol(data, c, Options({.identity_permutation = true}));
  ASSERT_TRUE(r.ok());
  AuditReport rep = AssertViews(r->s_view, r->t_view, r->participant_views,
                                r->ledger, Truth(data, c));
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("identity"), std::string::npos);

  r = RunLocalProtocol(data, c, Options({.zero_row_noise = true}));
  ASSERT_TRUE(r.ok());
  rep = AssertViews(r->s_view, r->t_view, r->participant_views, r->ledger,
                    Truth(data, c));
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("eta"), std::string::npos);
}

TEST_F(ProtocolTest, AuditFlagsForeignViews) {
  const auto data = DyadicDatasets(kOwners, 4, 17);
  const TaskConfig c = Config(17);
  auto r = RunLocalProtocol(data, c, Options());
  ASSERT_TRUE(r.ok());
  ViewTranscript t = r->t_view;
  t.RecordIntegers(5, kDecrypted, "leak", Matrix<mpz_class>(1, 1, mpz_class(3)));
  std::vector<ViewTranscript> ps = r->participant_views;
  ps[0].RecordReals(6, kReceivedPlaintext, "peek", RealMatrix(1, 1, 1.0));
  const AuditReport rep =
      AssertViews(r->s_view, t, ps, r->ledger, Truth(data, c));
  EXPECT_FALSE(rep.Find("c")->passed);
  EXPECT_FALSE(rep.Find("d")->passed);
  EXPECT_TRUE(rep.Find("a")->passed);
}

TEST_F(ProtocolTest, TranscriptsExportAsJsonLines) {
  const auto data = DyadicDatasets(kOwners, 4, 18);
  auto r = RunLocalProtocol(data, Config(18), Options());
  ASSERT_TRUE(r.ok());
  std::istringstream lines(r->s_view.ToJsonLines());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("role"), "collaborator:S");
    EXPECT_EQ(j.at("kind"), "decrypted");
    ++count;
  }
  EXPECT_EQ(count, 2);
  ViewTranscript off("x", false);
  off.RecordReals(1, kResult, "r", RealMatrix(1, 1));
  EXPECT_TRUE(off.entries().empty());
}

TEST_F(ProtocolTest, TRejectsDuplicateAndForeignUploads) {
  const auto data = DyadicDatasets(kOwners, 4, 19);
  const TaskConfig c = Config();
  CollaboratorT t(false);
  const KeyBroadcast kb{keys_->public_key.ToJson(), c};
  ASSERT_TRUE(t.ReceiveKey(kb).ok());
  Participant p(data[0], false);
  auto up = p.EncryptUpload(kb);
  ASSERT_TRUE(up.ok());
  EXPECT_TRUE(t.ReceiveUpload(*up).ok());
  EXPECT_EQ(t.ReceiveUpload(*up).code(), absl::StatusCode::kAlreadyExists);
  up->owner_id = "mallory";
  EXPECT_EQ(t.ReceiveUpload(*up).code(), absl::StatusCode::kPermissionDenied);
  EXPECT_FALSE(t.AllUploaded());
  EXPECT_FALSE(t.AddEntryNoise().ok());
}

}  // namespace
}  // namespace jtsne::protocol
