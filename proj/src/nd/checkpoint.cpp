#include "hoigaze/nd/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "hoigaze/errors.hpp"

namespace hoigaze::nd {
namespace {

constexpr const char* kMagic = "hoigaze-ckpt";
constexpr const char* kVersion = "v1";

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
  return buf;
}

Shape parse_shape(const std::string& text, const std::string& source, std::size_t line) {
  Shape shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long d = std::stoll(part, &used);
      if (used != part.size() || d < 1) throw std::invalid_argument(part);
      shape.push_back(static_cast<std::size_t>(d));
    } catch (const std::exception&) {
      throw ParseError(source, line, "bad shape '" + text + "'");
    }
  }
  if (shape.empty()) throw ParseError(source, line, "empty shape");
  return shape;
}

}  // namespace

const std::string& Checkpoint::get(const std::string& key) const {
  for (const auto& [k, v] : config)
    if (k == key) return v;
  throw DataError("checkpoint of kind '" + kind + "' has no '" + key + "' entry");
}

void write_checkpoint(std::ostream& out, const std::string& kind,
                      const std::vector<std::pair<std::string, std::string>>& config, const ParamSet& params) {
  out << kMagic << ' ' << kVersion << " kind=" << kind;
  for (const auto& [k, v] : config) out << ' ' << k << '=' << v;
  out << '\n';
  for (const Param* p : params.all()) {
    out << p->name << " shape=";
    const Shape& shape = p->value.shape();
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
    out << '\n';
    bool first = true;
    for (double v : p->value.data()) {
      if (!first) out << ' ';
      out << format_value(v);
      first = false;
    }
    out << '\n';
  }
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::vector<std::pair<std::string, std::string>>& config, const ParamSet& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, kind, config, params);
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  Checkpoint ckpt;
  std::string line;
  std::size_t number = 1;
  if (!std::getline(in, line)) throw DataError(source + ": empty checkpoint");
  {
    std::istringstream header(line);
    std::string magic, version, field;
    header >> magic >> version;
    if (magic != kMagic || version != kVersion) throw ParseError(source, 1, "not a hoigaze-ckpt v1 file");
    while (header >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError(source, 1, "bad header field '" + field + "'");
      const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "kind") ckpt.kind = value;
      else ckpt.config.emplace_back(key, value);
    }
    if (ckpt.kind.empty()) throw ParseError(source, 1, "missing kind");
  }
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::istringstream record(line);
    std::string name, shape_field;
    record >> name >> shape_field;
    if (shape_field.rfind("shape=", 0) != 0) throw ParseError(source, number, "expected '<name> shape=...'");
    const Shape shape = parse_shape(shape_field.substr(6), source, number);
    std::string values_line;
    if (!std::getline(in, values_line)) throw ParseError(source, number + 1, "missing values for " + name);
    ++number;
    std::istringstream vs(values_line);
    std::vector<double> values;
    values.reserve(shape_size(shape));
    std::string token;
    while (vs >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError(source, number, "bad number '" + token + "'");
      }
    }
    if (values.size() != shape_size(shape)) {
      throw ParseError(source, number, name + ": expected " + std::to_string(shape_size(shape)) + " values, got " +
                                           std::to_string(values.size()));
    }
    ckpt.params.emplace_back(name, NdArray(shape, std::move(values)));
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, path.string());
}

void restore_params(ParamSet& params, const Checkpoint& checkpoint) {
  std::set<std::string> seen;
  for (const auto& [name, value] : checkpoint.params) {
    Param* p = params.find(name);
    if (p == nullptr) throw DataError("checkpoint parameter '" + name + "' does not belong to this model");
    if (p->value.shape() != value.shape()) {
      throw DataError("checkpoint parameter '" + name + "' has shape " + shape_string(value.shape()) +
                      ", model expects " + shape_string(p->value.shape()));
    }
    if (!seen.insert(name).second) throw DataError("checkpoint repeats parameter '" + name + "'");
    p->value = value;
  }
  if (seen.size() != params.size()) {
    for (const Param* p : std::as_const(params).all())
      if (!seen.count(p->name)) throw DataError("checkpoint lacks parameter '" + p->name + "'");
  }
}

}  // namespace hoigaze::nd
