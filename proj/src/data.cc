// data.cc

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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.h"
#include "reslstm/error.h"
#include "reslstm/random.h"

namespace reslstm {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFeatMagic = "RLF1";
constexpr std::string_view kLabelMagic = "RLL1";

std::vector<std::uint32_t> teacher_labels(const NetworkParams &teacher,
                                          const NetworkConfig &config,
                                          const Matrix &inputs) {
  const Matrix logits = forward(teacher, config, inputs).logits;
  std::vector<std::uint32_t> labels(logits.rows());
  for (std::size_t t = 0; t < logits.rows(); ++t) labels[t] = argmax(logits.row(t));
  return labels;
}

bool balanced(const std::vector<std::size_t> &hist, std::size_t total,
              const SyntheticOptions &opt) {
  const std::size_t present =
      std::count_if(hist.begin(), hist.end(), [](std::size_t n) { return n > 0; });
  if (present < 2) return false;
  for (std::size_t n : hist) {
    const double share = static_cast<double>(n) / static_cast<double>(total);
    if (share > opt.max_class_share) return false;
    if (total >= 50 * hist.size() && share < opt.min_class_share) return false;
  }
  return true;
}

std::string resolve(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

}  // namespace

Matrix splice(const Matrix &frames, std::size_t context) {
  const std::size_t T = frames.rows(), d = frames.cols();
  const long k = static_cast<long>(context);
  Matrix out(T, (2 * context + 1) * d);
  for (std::size_t t = 0; t < T; ++t) {
    auto dst = out.row(t).begin();
    for (long off = -k; off <= k; ++off) {
      const long src = std::clamp(static_cast<long>(t) + off, 0L,
                                  static_cast<long>(T) - 1);
      auto row = frames.row(static_cast<std::size_t>(src));
      dst = std::copy(row.begin(), row.end(), dst);
    }
  }
  return out;
}

Matrix append_speaker(const Matrix &frames, const Vector &svec) {
  const std::size_t p = frames.cols();
  Matrix out(frames.rows(), p + svec.size());
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    auto src = frames.row(t);
    auto dst = std::copy(src.begin(), src.end(), out.row(t).begin());
    std::copy(svec.begin(), svec.end(), dst);
  }
  return out;
}

Matrix prepare_inputs(const Utterance &utt, const SpliceConfig &config) {
  if (utt.speaker_vec.size() != config.speaker_dim)
    throw DimensionError("utterance '" + utt.id + "': speaker vector has " +
                         std::to_string(utt.speaker_vec.size()) +
                         " dims, expected " + std::to_string(config.speaker_dim));
  Matrix spliced = splice(utt.frames, config.context);
  if (utt.speaker_vec.empty()) return spliced;
  return append_speaker(spliced, utt.speaker_vec);
}

std::vector<Utterance> prepare_corpus(const std::vector<Utterance> &corpus,
                                      const SpliceConfig &config) {
  std::vector<Utterance> out;
  out.reserve(corpus.size());
  for (const Utterance &u : corpus)
    out.push_back({u.id, prepare_inputs(u, config), u.labels, {}});
  return out;
}

void validate_corpus(const std::vector<Utterance> &corpus, std::size_t n_out) {
  if (corpus.empty()) throw ContractError("corpus is empty");
  const std::size_t dim = corpus.front().frames.cols();
  for (const Utterance &u : corpus) {
    if (u.frames.rows() < 1)
      throw ContractError("utterance '" + u.id + "' has no frames");
    if (u.labels.size() != u.frames.rows())
      throw ContractError("utterance '" + u.id + "' has " +
                          std::to_string(u.frames.rows()) + " frames but " +
                          std::to_string(u.labels.size()) + " labels");
    if (u.frames.cols() != dim)
      throw ContractError("utterance '" + u.id + "' has feature dim " +
                          std::to_string(u.frames.cols()) + ", corpus uses " +
                          std::to_string(dim));
    for (std::uint32_t l : u.labels)
      if (l >= n_out)
        throw ContractError("utterance '" + u.id + "' has label " +
                            std::to_string(l) + " >= n_out " +
                            std::to_string(n_out));
  }
}

std::uint32_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return static_cast<std::uint32_t>(best);
}

SyntheticCorpus gen_synthetic(const SyntheticOptions &opt) {
  if (opt.n_out < 2) throw ContractError("gen_synthetic: n_out must be >= 2");
  if (opt.n_utts < 1) throw ContractError("gen_synthetic: need >= 1 utterance");
  if (opt.min_frames < 1 || opt.max_frames < opt.min_frames)
    throw ContractError("gen_synthetic: bad frame range");
  if (opt.frame_dim < 1) throw ContractError("gen_synthetic: frame_dim must be >= 1");
  if (opt.speaker_dim > 0 && opt.n_speakers < 1)
    throw ContractError("gen_synthetic: need >= 1 speaker");

  SyntheticCorpus corpus;
  corpus.splice = {opt.context, opt.speaker_dim};

  Rng rng(derive_seed(opt.seed, 1));
  auto draw = [&rng]() { return static_cast<double>(static_cast<float>(rng.normal())); };

  std::vector<Vector> speakers;
  if (opt.speaker_dim > 0) {
    for (std::size_t s = 0; s < opt.n_speakers; ++s) {
      Vector v(opt.speaker_dim);
      for (double &x : v) x = draw();
      speakers.push_back(std::move(v));
    }
  }

  // Held-out utterances are drawn after the training ones, so adding them
  // leaves the training part of the corpus unchanged.
  const std::size_t n_all = opt.n_utts + opt.n_heldout;
  corpus.utterances.resize(n_all);
  for (std::size_t u = 0; u < n_all; ++u) {
    Utterance &utt = corpus.utterances[u];
    std::ostringstream id;
    if (u < opt.n_utts)
      id << "utt" << std::setfill('0') << std::setw(5) << u;
    else
      id << "dev" << std::setfill('0') << std::setw(5) << u - opt.n_utts;
    utt.id = id.str();
    const std::size_t T =
        opt.min_frames + rng.below(opt.max_frames - opt.min_frames + 1);
    utt.frames = Matrix(T, opt.frame_dim);
    for (double &x : utt.frames.values()) x = draw();
    if (!speakers.empty()) utt.speaker_vec = speakers[u % speakers.size()];
  }

  std::vector<Matrix> inputs;
  std::size_t total = 0;
  for (const Utterance &utt : corpus.utterances) {
    inputs.push_back(prepare_inputs(utt, corpus.splice));
    total += utt.frames.rows();
  }

  NetworkConfig &tc = corpus.teacher_config;
  tc.depth = 1;
  tc.dims = {corpus.splice.output_dim(opt.frame_dim), opt.teacher_cells,
             opt.teacher_proj, 0};
  tc.style = GateStyle::kFast;
  tc.variant = ResidualVariant::kNone;
  tc.n_out = opt.n_out;

  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    NetworkParams teacher =
        init_params(tc, derive_seed(opt.seed, 1000 + attempt));
    teacher.for_each([&](std::size_t, std::string_view, auto &t) {
      if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>)
        for (double &v : t.values()) v *= opt.teacher_scale;
    });

    // Center every output logit over the corpus so no class dominates.
    Vector mean(tc.n_out);
    for (const Matrix &x : inputs) {
      const Matrix logits = forward(teacher, tc, x).logits;
      for (std::size_t t = 0; t < logits.rows(); ++t)
        axpy(1.0, logits.row(t), mean.values());
    }
    for (std::size_t k = 0; k < tc.n_out; ++k)
      teacher.b_out[k] = -mean[k] / static_cast<double>(total);

    std::vector<std::size_t> hist(tc.n_out, 0);
    for (std::size_t u = 0; u < inputs.size(); ++u) {
      corpus.utterances[u].labels = teacher_labels(teacher, tc, inputs[u]);
      for (std::uint32_t l : corpus.utterances[u].labels) ++hist[l];
    }
    if (balanced(hist, total, opt)) {
      corpus.teacher = std::move(teacher);
      corpus.heldout.assign(
          std::make_move_iterator(corpus.utterances.begin() + opt.n_utts),
          std::make_move_iterator(corpus.utterances.end()));
      corpus.utterances.resize(opt.n_utts);
      return corpus;
    }
  }
  throw ContractError("gen_synthetic: no teacher produced a non-degenerate "
                      "label distribution in " +
                      std::to_string(opt.max_attempts) + " attempts");
}

void write_feat(const std::string &path, const Matrix &m) {
  internal::ByteWriter w;
  w.bytes(kFeatMagic);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) w.f32(static_cast<float>(v));
  internal::write_file_atomic(path, w.buffer());
}

Matrix decode_feat(const std::vector<char> &bytes) {
  internal::ByteReader r(bytes, "feature file");
  r.expect_magic(kFeatMagic);
  const std::uint32_t rows = r.u32("n_frames");
  const std::uint32_t cols = r.u32("dim");
  r.need_items(static_cast<std::uint64_t>(rows) * cols, 4, "feature data");
  Matrix m(rows, cols);
  for (double &v : m.values()) v = r.f32("feature data");
  r.expect_end();
  return m;
}

Matrix read_feat(const std::string &path) {
  return decode_feat(internal::read_file(path));
}

void write_labels(const std::string &path,
                  const std::vector<std::uint32_t> &labels) {
  internal::ByteWriter w;
  w.bytes(kLabelMagic);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (std::uint32_t l : labels) w.u32(l);
  internal::write_file_atomic(path, w.buffer());
}

std::vector<std::uint32_t> decode_labels(const std::vector<char> &bytes) {
  internal::ByteReader r(bytes, "label file");
  r.expect_magic(kLabelMagic);
  const std::uint32_t n = r.u32("n_frames");
  r.need_items(n, 4, "labels");
  std::vector<std::uint32_t> labels(n);
  for (auto &l : labels) l = r.u32("labels");
  r.expect_end();
  return labels;
}

std::vector<std::uint32_t> read_labels(const std::string &path) {
  return decode_labels(internal::read_file(path));
}

std::vector<ManifestEntry> read_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4)
      throw IoError("manifest '" + path + "' line " + std::to_string(lineno) +
                    ": expected 4 tab-separated fields, got " +
                    std::to_string(fields.size()));
    entries.push_back({fields[0], fields[1], fields[2],
                       fields[3] == "-" ? std::string() : fields[3]});
  }
  return entries;
}

void write_manifest(const std::string &path,
                    const std::vector<ManifestEntry> &entries) {
  std::string text;
  for (const ManifestEntry &e : entries)
    text += e.id + '\t' + e.feat_path + '\t' + e.label_path + '\t' +
            (e.speaker_path.empty() ? std::string("-") : e.speaker_path) + '\n';
  internal::write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

std::vector<Utterance> load_corpus(const std::string &manifest_path) {
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<Utterance> corpus;
  for (const ManifestEntry &e : read_manifest(manifest_path)) {
    Utterance u;
    u.id = e.id;
    u.frames = read_feat(resolve(base, e.feat_path));
    u.labels = read_labels(resolve(base, e.label_path));
    if (u.labels.size() != u.frames.rows())
      throw ContractError("utterance '" + e.id + "': " +
                          std::to_string(u.frames.rows()) + " frames but " +
                          std::to_string(u.labels.size()) + " labels");
    if (!e.speaker_path.empty()) {
      const Matrix s = read_feat(resolve(base, e.speaker_path));
      if (s.rows() != 1)
        throw ContractError("utterance '" + e.id +
                            "': speaker file must hold exactly one row");
      u.speaker_vec = s.row_vector(0);
    }
    corpus.push_back(std::move(u));
  }
  return corpus;
}

void write_corpus(const std::string &dir, const std::vector<Utterance> &corpus,
                  const std::string &manifest_name) {
  const fs::path base(dir);
  std::vector<ManifestEntry> entries;
  for (const Utterance &u : corpus) {
    ManifestEntry e{u.id, u.id + ".feat", u.id + ".lab", {}};
    write_feat((base / e.feat_path).string(), u.frames);
    write_labels((base / e.label_path).string(), u.labels);
    if (!u.speaker_vec.empty()) {
      e.speaker_path = u.id + ".spk";
      Matrix s(1, u.speaker_vec.size());
      s.set_row(0, u.speaker_vec.values());
      write_feat((base / e.speaker_path).string(), s);
    }
    entries.push_back(std::move(e));
  }
  write_manifest((base / manifest_name).string(), entries);
}

}  // namespace reslstm
