#include "hoigaze/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "hoigaze/cli/run_config.hpp"
#include "hoigaze/data/dataset.hpp"
#include "hoigaze/data/sequence_io.hpp"
#include "hoigaze/data/windows.hpp"
#include "hoigaze/errors.hpp"
#include "hoigaze/estimator/estimator.hpp"
#include "hoigaze/eval/evaluate.hpp"
#include "hoigaze/log.hpp"
#include "hoigaze/recognizer/recognizer.hpp"
#include "hoigaze/synth/generator.hpp"

namespace hoigaze::cli {
namespace fs = std::filesystem;
namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

bool is_flag_key(const std::string& key) {
  return key == "self_attention" || key == "cross_attention" || key == "use_gt_attended";
}

/// Config-file and per-key flags shared by the training, eval and infer
/// subcommands.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, std::pair<bool, bool>> flags;  // key -> (--key, --no-key)

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "key = value run configuration file");
    for (const std::string& key : RunConfig::keys()) {
      if (is_flag_key(key)) {
        auto& f = flags[key];
        cmd.add_flag("--" + dashed(key), f.first, "set " + key + " = true");
        cmd.add_flag("--no-" + dashed(key), f.second, "set " + key + " = false");
      } else {
        cmd.add_option("--" + dashed(key), values[key], "override " + key);
      }
    }
  }

  RunConfig resolve(const CLI::App& cmd) const {
    RunConfig config;
    if (!config_file.empty()) config.load_file(config_file);
    for (const auto& [key, value] : values) {
      if (cmd.count("--" + dashed(key)) > 0) config.set(key, value);
    }
    for (const auto& [key, pair] : flags) {
      if (pair.first && pair.second) throw ConfigError("both --" + dashed(key) + " and --no-" + dashed(key) + " given");
      if (pair.first) config.set(key, "true");
      if (pair.second) config.set(key, "false");
    }
    config.validate();
    return config;
  }
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void echo_config(std::ostream& out, const RunConfig& config, const std::string& prefix) {
  for (const std::string& line : config.resolved_lines()) out << prefix << line << '\n';
}

std::string log_line(const EpochLog& e) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu %.9g %.9g %.9g", e.epoch, e.loss, e.lr, e.metric);
  return buf;
}

std::string epoch_checkpoint(const std::string& kind, std::size_t epoch) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_epoch%03zu.ckpt", kind.c_str(), epoch);
  return buf;
}

void write_config_file(const fs::path& path, const RunConfig& config) {
  std::ofstream out = open_output(path);
  echo_config(out, config, "");
}

void require_match(const char* what, std::size_t model, std::size_t data, const std::string& source) {
  if (model != data) {
    throw DataError(source + ": checkpoint " + what + "=" + std::to_string(model) + " does not match " +
                    std::to_string(data));
  }
}

recognizer::Recognizer load_recognizer_for(const fs::path& path, std::size_t joints, std::size_t steps) {
  recognizer::Recognizer model = recognizer::Recognizer::load(path);
  require_match("N", model.config().joints, joints, path.string());
  require_match("T", model.config().steps, steps, path.string());
  return model;
}

estimator::Estimator load_estimator_for(const fs::path& path, std::size_t joints, std::size_t steps,
                                        std::size_t objects) {
  estimator::Estimator model = estimator::Estimator::load(path);
  require_match("N", model.config().joints, joints, path.string());
  require_match("T", model.config().steps, steps, path.string());
  if (model.config().objects > objects) {
    throw DataError(path.string() + ": checkpoint uses K=" + std::to_string(model.config().objects) +
                    " objects but the data has J=" + std::to_string(objects));
  }
  return model;
}

// -- synth -------------------------------------------------------------------

struct SynthOptions {
  synth::SynthConfig config;
  std::string hand_mode = "dynamic";
  std::string out_dir;
};

void attach_synth(CLI::App& cmd, SynthOptions& o) {
  cmd.add_option("--seed", o.config.seed, "generator seed")->capture_default_str();
  cmd.add_option("--sequences", o.config.num_sequences, "number of sequences")->capture_default_str();
  cmd.add_option("--frames", o.config.frames_per_sequence, "frames per sequence")->capture_default_str();
  cmd.add_option("--n", o.config.joints, "hand joints per hand")->capture_default_str();
  cmd.add_option("--j", o.config.objects, "objects per scene")->capture_default_str();
  cmd.add_option("--hand-mode", o.hand_mode, "dynamic or static")->capture_default_str();
  cmd.add_option("--coordination", o.config.coordination, "gaze pull toward the attended hand")->capture_default_str();
  cmd.add_option("--noise-deg", o.config.gaze_noise_deg, "gaze noise per axis")->capture_default_str();
  cmd.add_option("--head-follow", o.config.head_follow, "head slerp rate toward gaze")->capture_default_str();
  cmd.add_option("--switch-period", o.config.switch_period_frames, "mean frames between hand switches")
      ->capture_default_str();
  cmd.add_option("--holdout", o.config.holdout, "trailing sequences listed in test.txt")->capture_default_str();
  cmd.add_option("--out", o.out_dir, "output directory")->required();
}

int run_synth(SynthOptions& o, std::ostream& out) {
  o.config.hand_mode = data::parse_hand_mode(o.hand_mode);
  synth::validate(o.config);
  const data::DatasetManifest manifest = synth::generate_dataset(o.config, o.out_dir);
  out << "wrote " << manifest.sequences.size() << " sequences to " << o.out_dir << '\n';
  return kExitOk;
}

// -- training ----------------------------------------------------------------

struct TrainOptions {
  ConfigOptions config;
  std::string manifest;
  std::string out_dir;
  std::string recognizer;
};

template <typename Model>
EpochCallback checkpointing_logger(Model& model, const RunConfig& config, const fs::path& dir,
                                   const std::string& kind, std::ostream& log, std::ostream& out) {
  return [&model, &config, dir, kind, &log, &out](const EpochLog& e) {
    const std::string line = log_line(e);
    log << line << '\n';
    out << kind << " epoch " << line << '\n';
    const std::size_t done = e.epoch + 1;
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0) {
      model.save(dir / epoch_checkpoint(kind, done));
    }
  };
}

void begin_run(const RunConfig& config, const fs::path& dir, const std::string& kind, std::ostream& log,
               std::ostream& out, const char* metric) {
  echo_config(out, config, "config ");
  write_config_file(dir / (kind + "_config.txt"), config);
  log << "# hoigaze " << kind << " training\n";
  echo_config(log, config, "# ");
  log << "# epoch loss lr " << metric << '\n';
}

int run_train_recognizer(TrainOptions& o, const CLI::App& cmd, std::ostream& out) {
  const RunConfig config = o.config.resolve(cmd);
  const data::DatasetManifest manifest = data::load_manifest(o.manifest);
  const fs::path dir = o.out_dir;
  ensure_directory(dir);

  const auto windows = data::load_windows(manifest, config.window, config.train_stride);
  const auto samples = recognizer::make_labeled_windows(windows);
  recognizer::Recognizer model(config.recognizer_model(manifest.info.joints));

  std::ofstream log = open_output(dir / "recognizer.log");
  begin_run(config, dir, "recognizer", log, out, "accuracy");
  out << "training windows " << samples.size() << '\n';
  recognizer::train_recognizer(model, samples, config.recognizer_training(),
                               checkpointing_logger(model, config, dir, "recognizer", log, out));
  model.save(dir / "recognizer.ckpt");
  if (!log) throw IoError("write failed for " + (dir / "recognizer.log").string());
  out << "saved " << (dir / "recognizer.ckpt").string() << '\n';
  return kExitOk;
}

int run_train_estimator(TrainOptions& o, const CLI::App& cmd, std::ostream& out) {
  const RunConfig config = o.config.resolve(cmd);
  if (!config.use_gt_attended && o.recognizer.empty())
    throw ConfigError("train-estimator needs --recognizer <ckpt> or --use-gt-attended");
  if (config.use_gt_attended && !o.recognizer.empty())
    throw ConfigError("--recognizer and --use-gt-attended are mutually exclusive");
  const data::DatasetManifest manifest = data::load_manifest(o.manifest);
  if (config.objects > manifest.info.objects) {
    throw ConfigError("objects=" + std::to_string(config.objects) + " exceeds the " +
                      std::to_string(manifest.info.objects) + " objects in the data");
  }
  const fs::path dir = o.out_dir;
  ensure_directory(dir);

  const auto windows = data::load_windows(manifest, config.window, config.train_stride);
  std::optional<recognizer::Recognizer> rec;
  if (!config.use_gt_attended) rec.emplace(load_recognizer_for(o.recognizer, manifest.info.joints, config.window));
  const auto sides = estimator::attended_sides(windows, rec ? &*rec : nullptr);
  const auto samples = estimator::make_gaze_samples(windows, sides, config.objects);
  estimator::Estimator model(config.estimator_model(manifest.info.joints));

  std::ofstream log = open_output(dir / "estimator.log");
  begin_run(config, dir, "estimator", log, out, "error_deg");
  out << "training windows " << samples.size() << '\n';
  estimator::train_estimator(model, samples, config.estimator_training(),
                             checkpointing_logger(model, config, dir, "estimator", log, out));
  model.save(dir / "estimator.ckpt");
  if (!log) throw IoError("write failed for " + (dir / "estimator.log").string());
  out << "saved " << (dir / "estimator.ckpt").string() << '\n';
  return kExitOk;
}

// -- eval --------------------------------------------------------------------

struct EvalOptions {
  ConfigOptions config;
  std::string manifest;
  std::string estimator;
  std::string baseline;
  std::string recognizer;
  bool split = false;
  std::string out_dir;
};

int run_eval(EvalOptions& o, const CLI::App& cmd, std::ostream& out) {
  const RunConfig config = o.config.resolve(cmd);
  if (o.estimator.empty() == o.baseline.empty())
    throw ConfigError("eval needs exactly one of --estimator and --baseline");
  if (!o.baseline.empty() && o.baseline != "head-direction")
    throw ConfigError("unknown baseline '" + o.baseline + "'");
  if (o.split && o.recognizer.empty()) throw ConfigError("--split-by-recognizer needs --recognizer");

  const data::DatasetManifest manifest = data::load_manifest(o.manifest);
  const auto windows = data::load_windows(manifest, config.window, config.eval_stride);

  std::optional<recognizer::Recognizer> rec;
  if (!o.recognizer.empty()) rec.emplace(load_recognizer_for(o.recognizer, manifest.info.joints, config.window));
  std::optional<estimator::Estimator> est;
  eval::GazePredictor predictor;
  if (!o.estimator.empty()) {
    est.emplace(load_estimator_for(o.estimator, manifest.info.joints, config.window, manifest.info.objects));
    predictor = eval::estimator_predictor(*est);
  } else {
    predictor = eval::head_direction_predictor();
  }

  const eval::EvalReport report = eval::evaluate(windows, predictor, rec ? &*rec : nullptr);
  echo_config(out, config, "config ");
  out << "method " << (est ? "estimator" : "head-direction") << '\n';
  eval::write_summary(out, report, o.split);

  if (!o.out_dir.empty()) {
    const fs::path dir = o.out_dir;
    ensure_directory(dir);
    const std::vector<double> errors = report.errors();
    eval::export_raw_errors(errors, dir / "errors.txt");
    eval::export_cdf(errors, dir / "cdf.txt");
    std::ofstream summary = open_output(dir / "report.txt");
    echo_config(summary, config, "# ");
    summary << "method " << (est ? "estimator" : "head-direction") << '\n';
    eval::write_summary(summary, report, o.split);
    if (!summary) throw IoError("write failed for " + (dir / "report.txt").string());
  }
  return kExitOk;
}

// -- infer -------------------------------------------------------------------

struct InferOptions {
  ConfigOptions config;
  std::string estimator;
  std::string recognizer;
  std::string sequence;
  std::string out_file;
  std::size_t stride = 0;
};

int run_infer(InferOptions& o, const CLI::App& cmd, std::ostream& out) {
  const RunConfig config = o.config.resolve(cmd);
  if (!config.use_gt_attended && o.recognizer.empty())
    throw ConfigError("infer needs --recognizer <ckpt> or --use-gt-attended");
  const data::Sequence sequence = data::load_sequence(o.sequence);
  const std::size_t stride = cmd.count("--stride") > 0 ? o.stride : config.eval_stride;
  if (stride < 1) throw ConfigError("stride must be at least 1");

  const estimator::Estimator est =
      load_estimator_for(o.estimator, sequence.info.joints, config.window, sequence.info.objects);
  std::optional<recognizer::Recognizer> rec;
  if (!config.use_gt_attended) rec.emplace(load_recognizer_for(o.recognizer, sequence.info.joints, config.window));

  std::ofstream file;
  if (!o.out_file.empty()) file = open_output(o.out_file);
  std::ostream& sink = o.out_file.empty() ? out : file;

  std::size_t count = 0;
  char line[160];
  for (const data::FrameWindow& raw : data::split_windows(sequence, config.window, stride)) {
    const data::FrameWindow w = data::normalize_window(raw);
    const data::Side side = rec ? recognizer::infer_attended(rec->predict(w)).side : data::label_attended_hand(w).window;
    const nd::NdArray gaze = est.predict(w, side);
    for (std::size_t t = 0; t < w.length(); ++t) {
      std::snprintf(line, sizeof line, "%s %zu %zu %.9g %.9g %.9g\n", sequence.id.c_str(), w.start, w.start + t,
                    gaze.at(0, t), gaze.at(1, t), gaze.at(2, t));
      sink << line;
    }
    ++count;
  }
  if (!sink) throw IoError("write failed for " + (o.out_file.empty() ? std::string("<stdout>") : o.out_file));
  if (!o.out_file.empty()) out << "wrote " << count << " windows to " << o.out_file << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaze estimation from head, hand and object motion"};
  app.require_subcommand(1);

  SynthOptions synth_opts;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  attach_synth(*synth_cmd, synth_opts);

  TrainOptions rec_opts;
  CLI::App* rec_cmd = app.add_subcommand("train-recognizer", "train the attended-hand recogniser");
  rec_cmd->add_option("--manifest", rec_opts.manifest, "training manifest")->required();
  rec_cmd->add_option("--out", rec_opts.out_dir, "output directory")->required();
  rec_opts.config.attach(*rec_cmd);

  TrainOptions est_opts;
  CLI::App* est_cmd = app.add_subcommand("train-estimator", "train the gaze estimator");
  est_cmd->add_option("--manifest", est_opts.manifest, "training manifest")->required();
  est_cmd->add_option("--out", est_opts.out_dir, "output directory")->required();
  est_cmd->add_option("--recognizer", est_opts.recognizer, "recogniser checkpoint choosing the attended hand");
  est_opts.config.attach(*est_cmd);

  EvalOptions eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate on a test manifest");
  eval_cmd->add_option("--manifest", eval_opts.manifest, "test manifest")->required();
  eval_cmd->add_option("--estimator", eval_opts.estimator, "estimator checkpoint");
  eval_cmd->add_option("--baseline", eval_opts.baseline, "baseline name (head-direction)");
  eval_cmd->add_option("--recognizer", eval_opts.recognizer, "recogniser checkpoint");
  eval_cmd->add_flag("--split-by-recognizer", eval_opts.split, "report correct/wrong recognition breakdown");
  eval_cmd->add_option("--out", eval_opts.out_dir, "directory for errors.txt, cdf.txt and report.txt");
  eval_opts.config.attach(*eval_cmd);

  InferOptions infer_opts;
  CLI::App* infer_cmd = app.add_subcommand("infer", "predict gaze for one sequence");
  infer_cmd->add_option("--estimator", infer_opts.estimator, "estimator checkpoint")->required();
  infer_cmd->add_option("--recognizer", infer_opts.recognizer, "recogniser checkpoint");
  infer_cmd->add_option("--sequence", infer_opts.sequence, "sequence file")->required();
  infer_cmd->add_option("--out", infer_opts.out_file, "output file (default stdout)");
  infer_cmd->add_option("--stride", infer_opts.stride, "window stride (default eval_stride)");
  infer_opts.config.attach(*infer_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    for (const CLI::App* sub : app.get_subcommands()) err << sub->help();
    return kExitUsage;
  }

  set_warning_sink([&err](const std::string& message) { err << "warning: " << message << '\n'; });
  struct RestoreSink {
    ~RestoreSink() { set_warning_sink({}); }
  } restore;

  try {
    if (*synth_cmd) return run_synth(synth_opts, out);
    if (*rec_cmd) return run_train_recognizer(rec_opts, *rec_cmd, out);
    if (*est_cmd) return run_train_estimator(est_opts, *est_cmd, out);
    if (*eval_cmd) return run_eval(eval_opts, *eval_cmd, out);
    if (*infer_cmd) return run_infer(infer_opts, *infer_cmd, out);
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace hoigaze::cli
