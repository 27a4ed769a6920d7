// reslstm/data.h

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

#ifndef RESLSTM_DATA_H_
#define RESLSTM_DATA_H_

#include <cstdint>
#include <string>
#include <vector>

#include "reslstm/linalg.h"
#include "reslstm/network.h"

namespace reslstm {

struct Utterance {
  std::string id;
  Matrix frames;                      // T x d
  std::vector<std::uint32_t> labels;  // T
  Vector speaker_vec;                 // empty when absent
};

// Network input layout: (2·context + 1) spliced frames, then the speaker
// vector. With 40-dim features, context 2 and a 100-dim speaker vector this
// is the usual 300-dim acoustic-model input.
struct SpliceConfig {
  std::size_t context = 2;
  std::size_t speaker_dim = 0;

  std::size_t output_dim(std::size_t frame_dim) const {
    return (2 * context + 1) * frame_dim + speaker_dim;
  }
};

/// Row t becomes [frame(t-k), ..., frame(t+k)], indices clamped to [0, T-1].
Matrix splice(const Matrix &frames, std::size_t context);
/// Appends svec to every row.
Matrix append_speaker(const Matrix &frames, const Vector &svec);
/// splice() then append_speaker() (when the utterance carries a speaker
/// vector). Throws DimensionError if the speaker vector length differs from
/// config.speaker_dim.
Matrix prepare_inputs(const Utterance &utt, const SpliceConfig &config);
/// prepare_inputs over a corpus; the result holds network-ready frames and no
/// speaker vectors.
std::vector<Utterance> prepare_corpus(const std::vector<Utterance> &corpus,
                                      const SpliceConfig &config);

/// Checks labels < n_out and frame/label counts; throws ContractError naming
/// the utterance.
void validate_corpus(const std::vector<Utterance> &corpus, std::size_t n_out);

struct SyntheticOptions {
  std::uint64_t seed = 1;
  std::size_t n_utts = 200;
  // Extra utterances labelled by the same teacher, kept apart for scoring.
  std::size_t n_heldout = 0;
  std::size_t min_frames = 20;
  std::size_t max_frames = 50;
  std::size_t frame_dim = 2;
  std::size_t n_speakers = 10;
  std::size_t speaker_dim = 1;
  std::size_t n_out = 8;
  std::size_t context = 2;
  // Teacher: depth-1 fast LSTM over the spliced input.
  std::size_t teacher_cells = 8;
  std::size_t teacher_proj = 4;
  double teacher_scale = 0.3;
  // Every class must hold at least this share of frames (checked once the
  // corpus has >= 50 frames per class; otherwise only >= 2 classes required).
  double min_class_share = 0.02;
  double max_class_share = 0.98;
  int max_attempts = 64;
};

struct SyntheticCorpus {
  std::vector<Utterance> utterances;  // raw frames + speaker vectors
  std::vector<Utterance> heldout;
  NetworkConfig teacher_config;
  NetworkParams teacher;
  SpliceConfig splice;
};

/// Frames and speaker vectors are standard normal rounded to float (so they
/// survive the f32 feature files unchanged); labels are the teacher's argmax.
/// Throws ContractError if no teacher seed yields a non-degenerate labeling.
SyntheticCorpus gen_synthetic(const SyntheticOptions &options);

/// argmax with ties broken toward the lowest index.
std::uint32_t argmax(std::span<const double> values);

// RLF1: "RLF1", u32 n_frames, u32 dim, n_frames·dim f32, all little-endian.
void write_feat(const std::string &path, const Matrix &m);
Matrix read_feat(const std::string &path);
Matrix decode_feat(const std::vector<char> &bytes);
// RLL1: "RLL1", u32 n_frames, n_frames u32.
void write_labels(const std::string &path,
                  const std::vector<std::uint32_t> &labels);
std::vector<std::uint32_t> read_labels(const std::string &path);
std::vector<std::uint32_t> decode_labels(const std::vector<char> &bytes);

struct ManifestEntry {
  std::string id;
  std::string feat_path;
  std::string label_path;
  std::string speaker_path;  // empty when absent ("-" on disk)
};

std::vector<ManifestEntry> read_manifest(const std::string &path);
void write_manifest(const std::string &path,
                    const std::vector<ManifestEntry> &entries);

/// Reads a manifest and every file it references. Relative paths resolve
/// against the manifest's directory.
std::vector<Utterance> load_corpus(const std::string &manifest_path);

/// Writes <id>.feat / <id>.lab / <id>.spk files plus manifest.txt into dir,
/// with paths in the manifest relative to dir.
/// Writes <id>.feat/.lab/.spk for every utterance plus a manifest.
void write_corpus(const std::string &dir, const std::vector<Utterance> &corpus,
                  const std::string &manifest_name = "manifest.txt");

}  // namespace reslstm

#endif  // RESLSTM_DATA_H_
