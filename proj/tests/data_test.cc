// data_test.cc

// Copyright 2026  The reslstm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "reslstm/data.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "reslstm/error.h"
#include "reslstm/random.h"
#include "reslstm/training.h"

namespace reslstm {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string &name) {
  const char *env = std::getenv("RESLSTM_TEST_TMP");
  fs::path dir = env ? env : fs::temp_directory_path() / "reslstm_test";
  dir /= "data_" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<char> slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path &p, const std::vector<char> &bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool bit_equal(const Matrix &a, const Matrix &b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(Splice, ZeroContextIsIdentity) {
  const Matrix m{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(splice(m, 0), m);
}

TEST(Splice, HandExampleWithEdgeReplication) {
  const Matrix m{{1, 2}, {3, 4}, {5, 6}};
  const Matrix expect{{1, 2, 1, 2, 3, 4}, {1, 2, 3, 4, 5, 6}, {3, 4, 5, 6, 5, 6}};
  EXPECT_EQ(splice(m, 1), expect);
}

TEST(Splice, ConstantFramesGiveIdenticalRows) {
  const Matrix m(6, 3, 1.5);
  const Matrix s = splice(m, 2);
  for (std::size_t t = 1; t < s.rows(); ++t)
    EXPECT_EQ(s.row_vector(t), s.row_vector(0));
}

TEST(Splice, WidthAndInteriorLaw) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 1 + rng.below(12), d = 1 + rng.below(4),
                      k = rng.below(4);
    Matrix m(T, d);
    // Distinct values so replication is detectable by comparison.
    for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = static_cast<double>(i);
    const Matrix s = splice(m, k);
    ASSERT_EQ(s.cols(), (2 * k + 1) * d);
    ASSERT_EQ(s.rows(), T);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j <= 2 * k; ++j) {
        const long want = std::clamp<long>(static_cast<long>(t + j) -
                                               static_cast<long>(k),
                                           0, static_cast<long>(T) - 1);
        for (std::size_t c = 0; c < d; ++c)
          EXPECT_EQ(s(t, j * d + c), m(static_cast<std::size_t>(want), c));
      }
    }
  }
}

TEST(AppendSpeaker, SuffixRoundTrip) {
  const Matrix m{{1, 2}, {3, 4}};
  const Vector s{7, -0.0, 9};
  const Matrix out = append_speaker(m, s);
  ASSERT_EQ(out.cols(), 5u);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_EQ(slice(out.row_vector(t), 2, 3), s);
    EXPECT_TRUE(std::signbit(out(t, 3)));
  }
}

TEST(AppendSpeaker, ZeroVectorPads) {
  const Matrix out = append_speaker(Matrix(3, 2, 1.0), Vector(4));
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t c = 2; c < 6; ++c) EXPECT_EQ(out(t, c), 0.0);
}

TEST(PrepareInputs, SpeechInputGeometry) {
  // 40-dim frames spliced over +-2 plus a 100-dim speaker vector.
  Utterance u;
  u.frames = Matrix(4, 40);
  u.labels.assign(4, 0);
  u.speaker_vec = Vector(100, 0.5);
  const SpliceConfig cfg{2, 100};
  EXPECT_EQ(cfg.output_dim(40), 300u);
  EXPECT_EQ(prepare_inputs(u, cfg).cols(), 300u);
}

TEST(PrepareInputs, SpeakerDimMismatchThrows) {
  Utterance u;
  u.frames = Matrix(4, 3);
  u.labels.assign(4, 0);
  u.speaker_vec = Vector(2);
  EXPECT_THROW(prepare_inputs(u, {1, 5}), Error);
}

TEST(ValidateCorpus, CatchesBadUtterances) {
  Utterance u;
  u.id = "x1";
  u.frames = Matrix(3, 2);
  u.labels = {0, 1, 1};
  EXPECT_NO_THROW(validate_corpus({u}, 2));
  EXPECT_THROW(validate_corpus({u}, 1), ContractError);
  Utterance v = u;
  v.labels.pop_back();
  try {
    validate_corpus({u, v}, 2);
    FAIL() << "expected ContractError";
  } catch (const ContractError &e) {
    EXPECT_NE(std::string(e.what()).find("x1"), std::string::npos);
  }
  EXPECT_THROW(validate_corpus({}, 2), ContractError);
}

TEST(Argmax, LowestIndexWinsTies) {
  const std::vector<double> v{1, 3, 3, 2};
  EXPECT_EQ(argmax(v), 1u);
}

TEST(FeatFile, RoundTripIsBitExact) {
  const fs::path dir = temp_dir("feat");
  Rng rng(2);
  Matrix m(17, 5);
  for (double &v : m.values()) v = static_cast<float>(rng.normal());
  m(0, 0) = -0.0;
  write_feat((dir / "a.feat").string(), m);
  const Matrix back = read_feat((dir / "a.feat").string());
  EXPECT_TRUE(bit_equal(m, back));
  EXPECT_TRUE(std::signbit(back(0, 0)));
}

TEST(FeatFile, ScalarRoundTrip) {
  const fs::path p = temp_dir("scalar") / "s.feat";
  write_feat(p.string(), Matrix{{0.1f}});
  EXPECT_EQ(read_feat(p.string())(0, 0), static_cast<double>(0.1f));
  EXPECT_EQ(fs::file_size(p), 16u);
}

TEST(FeatFile, MissingFrameIsFormatErrorWithOffset) {
  const fs::path p = temp_dir("short") / "s.feat";
  write_feat(p.string(), Matrix(10, 3, 1.0));
  std::vector<char> bytes = slurp(p);
  bytes.resize(bytes.size() - 3 * 4);
  spit(p, bytes);
  try {
    read_feat(p.string());
    FAIL() << "expected FormatError";
  } catch (const FormatError &e) {
    EXPECT_EQ(e.offset(), 12u);
  }
}

TEST(FeatFile, CorruptionCases) {
  const fs::path p = temp_dir("corrupt") / "c.feat";
  write_feat(p.string(), Matrix(2, 2, 1.0));
  const std::vector<char> good = slurp(p);
  std::vector<char> bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_feat(bad), FormatError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_feat(bad), FormatError);
  for (std::size_t n = 0; n < good.size(); ++n)
    EXPECT_THROW(decode_feat({good.begin(), good.begin() + n}), FormatError);
  // Label magic in a feature file.
  bad = good;
  bad[2] = 'L';
  EXPECT_THROW(decode_feat(bad), FormatError);
}

TEST(FeatFile, MissingFileIsIoError) {
  EXPECT_THROW(read_feat((temp_dir("none") / "no.feat").string()), IoError);
}

TEST(LabelFile, RoundTrip) {
  const fs::path p = temp_dir("lab") / "a.lab";
  const std::vector<std::uint32_t> labels{0, 7, 4294967295u, 3};
  write_labels(p.string(), labels);
  EXPECT_EQ(read_labels(p.string()), labels);
  EXPECT_EQ(fs::file_size(p), 4u + 4u + 16u);
}

TEST(LabelFile, TruncationIsFormatError) {
  const fs::path p = temp_dir("labcut") / "a.lab";
  write_labels(p.string(), {1, 2, 3});
  const std::vector<char> good = slurp(p);
  for (std::size_t n = 0; n < good.size(); ++n)
    EXPECT_THROW(decode_labels({good.begin(), good.begin() + n}), FormatError);
}

TEST(Manifest, RoundTripWithAbsentSpeaker) {
  const fs::path p = temp_dir("manifest") / "m.txt";
  const std::vector<ManifestEntry> entries{{"a", "a.feat", "a.lab", "a.spk"},
                                           {"b", "sub/b.feat", "b.lab", ""}};
  write_manifest(p.string(), entries);
  std::ifstream in(p);
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(first, "a\ta.feat\ta.lab\ta.spk");
  EXPECT_EQ(second, "b\tsub/b.feat\tb.lab\t-");
  const auto back = read_manifest(p.string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].speaker_path, "");
  EXPECT_EQ(back[1].feat_path, "sub/b.feat");
}

TEST(Manifest, WrongFieldCountNamesLine) {
  const fs::path p = temp_dir("badmanifest") / "m.txt";
  std::ofstream(p) << "a\ta.feat\ta.lab\t-\nb\tb.feat\n";
  try {
    read_manifest(p.string());
    FAIL() << "expected an error";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

SyntheticOptions small_options(std::uint64_t seed) {
  SyntheticOptions o;
  o.seed = seed;
  o.n_utts = 30;
  o.n_heldout = 5;
  return o;
}

TEST(Synthetic, Deterministic) {
  const SyntheticCorpus a = gen_synthetic(small_options(4));
  const SyntheticCorpus b = gen_synthetic(small_options(4));
  ASSERT_EQ(a.utterances.size(), 30u);
  ASSERT_EQ(a.heldout.size(), 5u);
  for (std::size_t u = 0; u < 30; ++u) {
    EXPECT_TRUE(bit_equal(a.utterances[u].frames, b.utterances[u].frames));
    EXPECT_EQ(a.utterances[u].labels, b.utterances[u].labels);
    EXPECT_EQ(a.utterances[u].speaker_vec, b.utterances[u].speaker_vec);
  }
  EXPECT_EQ(a.teacher.flatten(), b.teacher.flatten());
  const SyntheticCorpus c = gen_synthetic(small_options(5));
  EXPECT_FALSE(bit_equal(a.utterances[0].frames, c.utterances[0].frames));
}

TEST(Synthetic, ShapesAndSpeakers) {
  SyntheticOptions o = small_options(6);
  o.min_frames = 20;
  o.max_frames = 50;
  const SyntheticCorpus c = gen_synthetic(o);
  for (std::size_t u = 0; u < c.utterances.size(); ++u) {
    const Utterance &utt = c.utterances[u];
    EXPECT_GE(utt.frames.rows(), 20u);
    EXPECT_LE(utt.frames.rows(), 50u);
    EXPECT_EQ(utt.frames.cols(), o.frame_dim);
    EXPECT_EQ(utt.labels.size(), utt.frames.rows());
    EXPECT_EQ(utt.speaker_vec.size(), o.speaker_dim);
    EXPECT_EQ(utt.speaker_vec, c.utterances[u % o.n_speakers].speaker_vec);
  }
  EXPECT_EQ(c.utterances[3].id, "utt00003");
  EXPECT_EQ(c.heldout[1].id, "dev00001");
}

TEST(Synthetic, HeldoutDoesNotChangeTrainingPart) {
  SyntheticOptions o = small_options(7);
  const SyntheticCorpus with = gen_synthetic(o);
  o.n_heldout = 0;
  const SyntheticCorpus without = gen_synthetic(o);
  EXPECT_TRUE(without.heldout.empty());
  for (std::size_t u = 0; u < o.n_utts; ++u)
    EXPECT_TRUE(bit_equal(with.utterances[u].frames,
                          without.utterances[u].frames));
}

TEST(Synthetic, LabelHistogramIsBalanced) {
  SyntheticOptions o;
  o.n_utts = 400;
  const SyntheticCorpus c = gen_synthetic(o);
  std::vector<std::size_t> hist(o.n_out, 0);
  std::size_t total = 0;
  for (const Utterance &u : c.utterances) {
    for (std::uint32_t l : u.labels) ++hist[l];
    total += u.labels.size();
  }
  ASSERT_GE(total, 10000u);
  for (std::size_t k = 0; k < o.n_out; ++k) {
    const double share = static_cast<double>(hist[k]) / total;
    EXPECT_GE(share, 0.02) << "class " << k;
    EXPECT_LE(share, 0.98) << "class " << k;
  }
}

TEST(Synthetic, TeacherScoresPerfectly) {
  const SyntheticCorpus c = gen_synthetic(small_options(8));
  const auto train = prepare_corpus(c.utterances, c.splice);
  const auto dev = prepare_corpus(c.heldout, c.splice);
  EXPECT_EQ(evaluate(c.teacher, c.teacher_config, train), 0.0);
  EXPECT_EQ(evaluate(c.teacher, c.teacher_config, dev), 0.0);
}

TEST(Synthetic, RejectsBadOptions) {
  SyntheticOptions o;
  o.n_out = 1;
  EXPECT_THROW(gen_synthetic(o), ContractError);
  o = {};
  o.n_utts = 0;
  EXPECT_THROW(gen_synthetic(o), ContractError);
  o = {};
  o.min_frames = 10;
  o.max_frames = 5;
  EXPECT_THROW(gen_synthetic(o), ContractError);
}

TEST(Corpus, WriteThenLoadIsExact) {
  const fs::path dir = temp_dir("corpus");
  const SyntheticCorpus c = gen_synthetic(small_options(9));
  write_corpus(dir.string(), c.utterances);
  write_corpus(dir.string(), c.heldout, "heldout.txt");
  const auto back = load_corpus((dir / "manifest.txt").string());
  ASSERT_EQ(back.size(), c.utterances.size());
  for (std::size_t u = 0; u < back.size(); ++u) {
    EXPECT_EQ(back[u].id, c.utterances[u].id);
    EXPECT_TRUE(bit_equal(back[u].frames, c.utterances[u].frames));
    EXPECT_EQ(back[u].labels, c.utterances[u].labels);
    EXPECT_EQ(back[u].speaker_vec, c.utterances[u].speaker_vec);
  }
  EXPECT_EQ(load_corpus((dir / "heldout.txt").string()).size(), 5u);
}

TEST(Corpus, PathsResolveAgainstManifestDirectory) {
  const fs::path dir = temp_dir("relative");
  fs::create_directories(dir / "feats");
  write_feat((dir / "feats" / "a.feat").string(), Matrix(2, 1, 3.0));
  write_labels((dir / "a.lab").string(), {0, 1});
  std::ofstream(dir / "m.txt") << "a\tfeats/a.feat\ta.lab\t-\n";
  const auto c = load_corpus((dir / "m.txt").string());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].frames(1, 0), 3.0);
  EXPECT_TRUE(c[0].speaker_vec.empty());
}

TEST(Corpus, LabelCountMismatchRejected) {
  const fs::path dir = temp_dir("mismatch");
  write_feat((dir / "a.feat").string(), Matrix(3, 1));
  write_labels((dir / "a.lab").string(), {0, 1});
  std::ofstream(dir / "m.txt") << "a\ta.feat\ta.lab\t-\n";
  EXPECT_THROW(load_corpus((dir / "m.txt").string()), Error);
}

}  // namespace
}  // namespace reslstm
