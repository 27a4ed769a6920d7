// cli.cc

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

#include "reslstm/cli.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "reslstm/data.h"
#include "reslstm/error.h"
#include "reslstm/network.h"
#include "reslstm/training.h"

namespace reslstm::cli {

namespace fs = std::filesystem;

namespace {

struct NetFlags {
  std::size_t depth = 2;
  std::size_t n_x = 0;
  std::size_t n_c = 0;
  std::size_t n_r = 0;
  std::size_t n_nr = 0;
  std::string style = "fast";
  std::string variant = "none";
  std::size_t n_out = 0;

  NetworkConfig config() const {
    NetworkConfig c;
    c.depth = depth;
    c.dims = {n_x, n_c, n_r, n_nr};
    c.style = parse_gate_style(style);
    c.variant = parse_residual_variant(variant);
    c.n_out = n_out;
    return c;
  }
};

const std::vector<std::string> kStyles = {"standard", "fast"};
const std::vector<std::string> kVariants = {"none", "res1", "res2", "res3"};

void add_arch_flags(CLI::App *app, NetFlags &f, bool with_nx) {
  app->add_option("--depth", f.depth, "Number of LSTM layers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (with_nx)
    app->add_option("--nx", f.n_x, "Input dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  app->add_option("--nc", f.n_c, "Cell dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--nr", f.n_r, "Recurrent projection dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--nnr", f.n_nr, "Non-recurrent projection dimension")
      ->capture_default_str();
  app->add_option("--style", f.style, "Gate style: standard or fast")
      ->check(CLI::IsMember(kStyles))
      ->capture_default_str();
  app->add_option("--variant", f.variant,
                  "Residual variant: none, res1, res2 or res3")
      ->check(CLI::IsMember(kVariants))
      ->capture_default_str();
}

std::string table_row_name(GateStyle style, ResidualVariant variant) {
  std::string name = style == GateStyle::kFast ? "Fast LSTM" : "LSTM";
  switch (variant) {
    case ResidualVariant::kNone: break;
    case ResidualVariant::kRes1: name += " Res-1"; break;
    case ResidualVariant::kRes2: name += " Res-2"; break;
    case ResidualVariant::kRes3: name += " Res-3"; break;
  }
  return name;
}

// Staging directory next to `out`; files are moved into `out` only after
// everything was written.
class StagedDir {
 public:
  explicit StagedDir(fs::path out) : out_(std::move(out)) {
    staging_ = out_;
    staging_ += ".partial";
    fs::remove_all(staging_);
    if (!fs::create_directories(staging_))
      throw IoError("cannot create '" + staging_.string() + "'");
  }
  ~StagedDir() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
  const fs::path &path() const { return staging_; }

  void commit() {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw IoError("cannot create '" + out_.string() + "'");
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(staging_))
      files.push_back(entry.path());
    for (const fs::path &p : files) {
      fs::rename(p, out_ / p.filename(), ec);
      if (ec) throw IoError("cannot move '" + p.string() + "' into '" +
                            out_.string() + "'");
    }
  }

 private:
  fs::path out_;
  fs::path staging_;
};

std::uint64_t default_seed() {
  if (const char *env = std::getenv("RESLSTM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception &) {
    }
  }
  return 1;
}

std::size_t infer_n_out(const std::vector<Utterance> &corpus) {
  std::uint32_t mx = 1;
  for (const Utterance &u : corpus)
    for (std::uint32_t l : u.labels) mx = std::max(mx, l);
  return static_cast<std::size_t>(mx) + 1;
}

std::size_t speaker_dim_of(const std::vector<Utterance> &corpus) {
  return corpus.empty() ? 0 : corpus.front().speaker_vec.size();
}

std::string fmt(const char *pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

int run_gen_data(const SyntheticOptions &opt, const std::string &out_dir,
                 bool emit_teacher, std::ostream &out) {
  SyntheticCorpus corpus = gen_synthetic(opt);
  {
    StagedDir staged{fs::path(out_dir)};
    write_corpus(staged.path().string(), corpus.utterances);
    if (!corpus.heldout.empty())
      write_corpus(staged.path().string(), corpus.heldout, "heldout.txt");
    if (emit_teacher)
      save_model(corpus.teacher, corpus.teacher_config,
                 (staged.path() / "teacher.rlm").string());
    staged.commit();
  }
  std::size_t frames = 0;
  std::set<std::uint32_t> classes;
  for (const Utterance &u : corpus.utterances) {
    frames += u.frames.rows();
    classes.insert(u.labels.begin(), u.labels.end());
  }
  out << "utterances=" << corpus.utterances.size() << " frames=" << frames
      << " classes=" << classes.size() << " input_dim="
      << corpus.splice.output_dim(opt.frame_dim);
  if (!corpus.heldout.empty()) out << " heldout=" << corpus.heldout.size();
  out << "\n";
  return kOk;
}

struct TrainFlags {
  std::string manifest, dev, model, log;
  NetFlags net;
  Hyperparams hyper;
  double clip = 5.0;
  std::uint64_t seed = 1;
  std::size_t context = 2;
};

int run_train(TrainFlags f, std::ostream &out) {
  // Everything that can be checked without the data is checked first.
  f.hyper.grad_clip = f.clip > 0.0 ? std::optional<double>(f.clip) : std::nullopt;
  f.hyper.validate();
  {
    NetworkConfig probe = f.net.config();
    probe.dims.n_x = 1;
    if (probe.n_out == 0) probe.n_out = 2;
    probe.validate();
  }

  const std::vector<Utterance> raw = load_corpus(f.manifest);
  if (raw.empty()) throw ContractError("manifest '" + f.manifest + "' is empty");
  const SpliceConfig splice{f.context, speaker_dim_of(raw)};
  const std::vector<Utterance> train_set = prepare_corpus(raw, splice);
  std::vector<Utterance> dev_set;
  if (!f.dev.empty()) dev_set = prepare_corpus(load_corpus(f.dev), splice);

  NetworkConfig config = f.net.config();
  config.dims.n_x = train_set.front().frames.cols();
  if (config.n_out == 0)
    config.n_out = std::max(infer_n_out(raw), dev_set.empty() ? 2 : infer_n_out(dev_set));
  config.validate();
  validate_corpus(train_set, config.n_out);
  if (!dev_set.empty()) validate_corpus(dev_set, config.n_out);

  std::ofstream log;
  if (!f.log.empty()) {
    log.open(f.log, std::ios::app);
    if (!log) throw IoError("cannot open log '" + f.log + "'");
  }

  TrainState state = TrainState::start(init_params(config, f.seed));
  train(state, config, train_set, dev_set, f.hyper, [&](const EpochReport &r) {
    if (!std::isfinite(r.loss))
      throw NumericError("non-finite loss in epoch " + std::to_string(r.epoch));
    const std::string line = format_report(r);
    out << line << "\n" << std::flush;
    if (log) log << line << "\n" << std::flush;
  });
  save_model(state.params, config, f.model);
  return kOk;
}

int run_eval(const std::string &manifest, const std::string &model_path,
             std::size_t context, std::ostream &out) {
  const Model model = load_model(model_path);
  const std::vector<Utterance> raw = load_corpus(manifest);
  if (raw.empty()) throw ContractError("manifest '" + manifest + "' is empty");
  const std::vector<Utterance> data =
      prepare_corpus(raw, {context, speaker_dim_of(raw)});
  if (data.front().frames.cols() != model.config.dims.n_x)
    throw ContractError("corpus input dim " +
                        std::to_string(data.front().frames.cols()) +
                        " does not match model n_x " +
                        std::to_string(model.config.dims.n_x));
  validate_corpus(data, model.config.n_out);
  const double fer = evaluate(model.params, model.config, data);
  const double loss = evaluate_loss(model.params, model.config, data);
  out << "fer=" << fmt("%.6f", fer) << " loss=" << fmt("%.6f", loss) << "\n";
  return kOk;
}

struct GradCheckFlags {
  NetFlags net;
  std::string style = "all", variant = "all";
  std::size_t frames = 5;
  double eps = 1e-5;
  double tol = 1e-4;
  std::uint64_t seed = 1;
};

int run_grad_check(const GradCheckFlags &f, std::ostream &out) {
  std::vector<GateStyle> styles;
  std::vector<ResidualVariant> variants;
  for (const auto &s : kStyles)
    if (f.style == "all" || f.style == s) styles.push_back(parse_gate_style(s));
  for (const auto &v : kVariants)
    if (f.variant == "all" || f.variant == v)
      variants.push_back(parse_residual_variant(v));

  double worst = 0.0;
  for (GateStyle style : styles) {
    for (ResidualVariant variant : variants) {
      NetFlags nf = f.net;
      nf.style = std::string(to_string(style));
      nf.variant = std::string(to_string(variant));
      const NetworkConfig config = nf.config();
      config.validate();
      const GradCheckResult r = grad_check(config, f.seed, f.frames, f.eps);
      out << "style=" << to_string(style) << " variant=" << to_string(variant)
          << " params=" << r.checked << " max_rel_err=" << fmt("%.3e", r.max_rel_err)
          << " worst=\"" << r.worst << "\"\n";
      worst = std::max(worst, r.max_rel_err);
    }
  }
  out << "max_rel_err=" << fmt("%.3e", worst) << "\n";
  return worst < f.tol ? kOk : kToleranceExceeded;
}

int run_count_params(const NetFlags &f, bool table1, std::ostream &out) {
  if (!table1) {
    const NetworkConfig config = f.config();
    const std::uint64_t n = count_params(config);
    out << n << " (" << format_millions(n) << ")\n";
    return kOk;
  }
  out << "# model\tdepth\tparams\trounded\n";
  for (GateStyle style : {GateStyle::kStandard, GateStyle::kFast}) {
    for (ResidualVariant variant :
         {ResidualVariant::kNone, ResidualVariant::kRes1, ResidualVariant::kRes2,
          ResidualVariant::kRes3}) {
      for (std::size_t depth : {2, 3, 4}) {
        NetFlags row = f;
        row.depth = depth;
        row.style = std::string(to_string(style));
        row.variant = std::string(to_string(variant));
        const std::uint64_t n = count_params(row.config());
        out << table_row_name(style, variant) << '\t' << depth << '\t' << n
            << '\t' << format_millions(n) << '\n';
      }
    }
  }
  return kOk;
}

}  // namespace

std::string format_millions(std::uint64_t n) {
  const auto tenths =
      static_cast<std::uint64_t>(std::llround(static_cast<double>(n) / 1e5));
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "M";
}

std::vector<std::string> expand_config(const std::vector<std::string> &args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    else if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty() || args.empty()) return args;

  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::set<std::string> given;
  for (const std::string &a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));

  std::vector<std::string> expanded{args.front()};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || given.count(key)) continue;
    expanded.push_back("--" + key + "=" + value);
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

int run(const std::vector<std::string> &raw_args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Residual LSTM acoustic-model toolkit", "reslstm"};
  app.require_subcommand(1);

  std::string config_file;
  auto add_config = [&config_file](CLI::App *sub) {
    sub->add_option("--config", config_file,
                    "Plain key=value file of defaults; flags override it");
  };

  // gen-data
  SyntheticOptions gen;
  gen.seed = default_seed();
  std::string gen_out;
  bool emit_teacher = false;
  CLI::App *gen_cmd =
      app.add_subcommand("gen-data", "Generate a teacher-labelled synthetic corpus");
  gen_cmd->add_option("--seed", gen.seed, "Corpus seed (default: $RESLSTM_SEED or 1)")
      ->capture_default_str();
  gen_cmd->add_option("--utts", gen.n_utts, "Number of utterances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--heldout", gen.n_heldout,
                      "Extra teacher-labelled utterances listed in heldout.txt")
      ->capture_default_str();
  gen_cmd->add_option("--min-frames", gen.min_frames, "Shortest utterance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--max-frames", gen.max_frames, "Longest utterance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--dim", gen.frame_dim, "Raw frame dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--speakers", gen.n_speakers, "Number of speakers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--speaker-dim", gen.speaker_dim,
                      "Speaker vector dimension (0 for none)")
      ->capture_default_str();
  gen_cmd->add_option("--nout", gen.n_out, "Number of classes")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  gen_cmd->add_option("--context", gen.context, "Splice context (frames each side)")
      ->capture_default_str();
  gen_cmd->add_option("--teacher-cells", gen.teacher_cells, "Teacher cell dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--teacher-proj", gen.teacher_proj,
                      "Teacher recurrent projection dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--teacher-scale", gen.teacher_scale, "Teacher weight scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output directory")->required();
  gen_cmd->add_flag("--emit-teacher", emit_teacher,
                    "Also write the teacher network as teacher.rlm");
  add_config(gen_cmd);

  // train
  TrainFlags tf;
  tf.seed = default_seed();
  tf.net.n_c = 32;
  tf.net.n_r = 16;
  tf.net.variant = "res1";
  CLI::App *train_cmd = app.add_subcommand("train", "Train a network with frame-level CE");
  train_cmd->add_option("--manifest", tf.manifest, "Training corpus manifest")
      ->required();
  train_cmd->add_option("--dev", tf.dev, "Held-out manifest for the per-epoch fer");
  train_cmd->add_option("--model", tf.model, "Output model file")->required();
  add_arch_flags(train_cmd, tf.net, false);
  train_cmd->add_option("--nout", tf.net.n_out,
                        "Number of classes (0: largest label + 1)")
      ->capture_default_str();
  train_cmd->add_option("--lr", tf.hyper.learning_rate, "Learning rate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--momentum", tf.hyper.momentum, "Momentum in [0, 1)")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  train_cmd->add_option("--clip", tf.clip, "Global gradient-norm clip (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--cell-clip", tf.hyper.cell_clip,
                        "Clamp cell activations to +-value (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--epochs", tf.hyper.epochs, "Epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--seed", tf.seed, "Initialization seed")->capture_default_str();
  train_cmd->add_option("--shuffle-seed", tf.hyper.shuffle_seed, "Utterance order seed")
      ->capture_default_str();
  train_cmd->add_option("--context", tf.context, "Splice context")->capture_default_str();
  train_cmd->add_option("--log", tf.log, "Append epoch reports to this file");
  train_cmd->add_option("--jobs", tf.hyper.jobs,
                        "Utterances processed concurrently per update group")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_config(train_cmd);

  // eval
  std::string eval_manifest, eval_model;
  std::size_t eval_context = 2;
  CLI::App *eval_cmd = app.add_subcommand("eval", "Frame error rate of a model");
  eval_cmd->add_option("--manifest", eval_manifest, "Corpus manifest")->required();
  eval_cmd->add_option("--model", eval_model, "Model file")->required();
  eval_cmd->add_option("--context", eval_context, "Splice context")->capture_default_str();
  add_config(eval_cmd);

  // grad-check
  GradCheckFlags gc;
  gc.seed = default_seed();
  gc.net.n_x = 7;
  gc.net.n_c = 6;
  gc.net.n_r = 3;
  gc.net.n_nr = 2;
  gc.net.n_out = 4;
  CLI::App *gc_cmd = app.add_subcommand(
      "grad-check", "Compare analytic gradients against central differences");
  gc_cmd->add_option("--depth", gc.net.depth, "Number of LSTM layers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--nx", gc.net.n_x, "Input dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--nc", gc.net.n_c, "Cell dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--nr", gc.net.n_r, "Recurrent projection dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--nnr", gc.net.n_nr, "Non-recurrent projection dimension")
      ->capture_default_str();
  gc_cmd->add_option("--nout", gc.net.n_out, "Number of classes")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  gc_cmd->add_option("--style", gc.style, "standard, fast or all")
      ->check(CLI::IsMember({"standard", "fast", "all"}))
      ->capture_default_str();
  gc_cmd->add_option("--variant", gc.variant, "none, res1, res2, res3 or all")
      ->check(CLI::IsMember({"none", "res1", "res2", "res3", "all"}))
      ->capture_default_str();
  gc_cmd->add_option("--frames", gc.frames, "Sequence length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--eps", gc.eps, "Finite-difference step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--tol", gc.tol, "Maximum allowed relative error")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc_cmd->add_option("--seed", gc.seed, "Network/data seed")->capture_default_str();
  add_config(gc_cmd);

  // count-params
  NetFlags cp;
  cp.n_x = 300;
  cp.n_c = 1024;
  cp.n_r = 512;
  cp.n_nr = 0;
  cp.n_out = 1936;
  cp.style = "standard";
  bool table1 = false;
  CLI::App *cp_cmd =
      app.add_subcommand("count-params", "Closed-form parameter count");
  add_arch_flags(cp_cmd, cp, true);
  cp_cmd->add_option("--nout", cp.n_out, "Number of output targets")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30))
      ->capture_default_str();
  cp_cmd->add_flag("--table1", table1,
                   "Print every style x variant x depth {2,3,4} row for the "
                   "given dims");
  add_config(cp_cmd);

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }
  std::vector<std::string> argv_store{"reslstm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char *> argv;
  for (const auto &a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadFlags;
  }

  try {
    if (gen_cmd->parsed()) {
      if (gen.max_frames < gen.min_frames) {
        err << "error: --max-frames must be >= --min-frames\n";
        return kBadFlags;
      }
      return run_gen_data(gen, gen_out, emit_teacher, out);
    }
    if (train_cmd->parsed()) return run_train(tf, out);
    if (eval_cmd->parsed()) return run_eval(eval_manifest, eval_model, eval_context, out);
    if (gc_cmd->parsed()) return run_grad_check(gc, out);
    if (cp_cmd->parsed()) return run_count_params(cp, table1, out);
  } catch (const NumericError &e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const IoError &e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const FormatError &e) {
    err << "format error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const fs::filesystem_error &e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }
  return kFailure;
}

}  // namespace reslstm::cli
