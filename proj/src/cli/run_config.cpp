#include "hoigaze/cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "hoigaze/errors.hpp"

namespace hoigaze::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] == '-') throw std::invalid_argument(text);
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field count_field(const char* key, T RunConfig::*member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(parse_unsigned(key, v)); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(const char* key, double RunConfig::*member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { c.*member = parse_double(key, v); },
          [member](const RunConfig& c) { return show(c.*member); }};
}

Field flag_field(const char* key, bool RunConfig::*member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { c.*member = parse_bool(key, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      count_field("seed", &RunConfig::seed),
      count_field("window", &RunConfig::window),
      count_field("train_stride", &RunConfig::train_stride),
      count_field("eval_stride", &RunConfig::eval_stride),
      count_field("batch", &RunConfig::batch),
      real_field("lr_decay", &RunConfig::lr_decay),
      count_field("checkpoint_every", &RunConfig::checkpoint_every),
      count_field("recognizer_epochs", &RunConfig::recognizer_epochs),
      real_field("recognizer_lr", &RunConfig::recognizer_lr),
      real_field("recognizer_weight_decay", &RunConfig::recognizer_weight_decay),
      count_field("recognizer_gcn_blocks", &RunConfig::recognizer_gcn_blocks),
      count_field("estimator_epochs", &RunConfig::estimator_epochs),
      real_field("estimator_lr", &RunConfig::estimator_lr),
      count_field("estimator_gcn_blocks", &RunConfig::estimator_gcn_blocks),
      count_field("objects", &RunConfig::objects),
      real_field("cos_eh", &RunConfig::cos_eh),
      real_field("f_eh", &RunConfig::f_eh),
      {"loss",
       [](RunConfig& c, const std::string& v) {
         if (v != "eye_head" && v != "mse") throw ConfigError("loss: expected eye_head or mse, got '" + v + "'");
         c.loss = v;
       },
       [](const RunConfig& c) { return c.loss; }},
      flag_field("self_attention", &RunConfig::self_attention),
      flag_field("cross_attention", &RunConfig::cross_attention),
      flag_field("use_gt_attended", &RunConfig::use_gt_attended),
  };
  return table;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Field& f : fields()) out.push_back(f.key);
    return out;
  }();
  return names;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::validate() const {
  if (window < 1) throw ConfigError("window must be at least 1");
  if (train_stride < 1 || eval_stride < 1) throw ConfigError("strides must be at least 1");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must lie in (0, 1]");
  if (recognizer_epochs < 1 || estimator_epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(recognizer_lr > 0.0) || !(estimator_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(recognizer_weight_decay >= 0.0)) throw ConfigError("recognizer_weight_decay must be non-negative");
  if (!(f_eh > 0.0)) throw ConfigError("f_eh must be positive");
  if (!(cos_eh >= -1.0 && cos_eh <= 1.0)) throw ConfigError("cos_eh must lie in [-1, 1]");
}

std::vector<std::string> RunConfig::resolved_lines() const {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key + " = " + f.get(*this));
  return out;
}

recognizer::RecognizerConfig RunConfig::recognizer_model(std::size_t joints) const {
  recognizer::RecognizerConfig c;
  c.joints = joints;
  c.steps = window;
  c.gcn_blocks = recognizer_gcn_blocks;
  c.seed = seed;
  return c;
}

recognizer::RecognizerTrainConfig RunConfig::recognizer_training() const {
  recognizer::RecognizerTrainConfig c;
  c.epochs = recognizer_epochs;
  c.batch = batch;
  c.lr = recognizer_lr;
  c.decay = lr_decay;
  c.weight_decay = recognizer_weight_decay;
  c.seed = seed;
  return c;
}

estimator::EstimatorConfig RunConfig::estimator_model(std::size_t joints) const {
  estimator::EstimatorConfig c;
  c.joints = joints;
  c.objects = objects;
  c.steps = window;
  c.gcn_blocks = estimator_gcn_blocks;
  c.use_self_attention = self_attention;
  c.use_cross_attention = cross_attention;
  c.loss.cos_threshold = cos_eh;
  c.loss.weight = f_eh;
  c.loss.mse = loss == "mse";
  c.seed = seed;
  return c;
}

estimator::EstimatorTrainConfig RunConfig::estimator_training() const {
  estimator::EstimatorTrainConfig c;
  c.epochs = estimator_epochs;
  c.batch = batch;
  c.lr = estimator_lr;
  c.decay = lr_decay;
  c.seed = seed;
  return c;
}

}  // namespace hoigaze::cli
