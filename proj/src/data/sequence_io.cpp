#include "hoigaze/data/sequence_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "hoigaze/errors.hpp"

namespace hoigaze::data {
namespace {

constexpr double kUnitTolerance = 1e-2;

std::size_t parse_count(const std::string& key, const std::string& value, const std::string& source) {
  std::size_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(source, 1, "bad value for " + key + ": '" + value + "'");
  }
  return out;
}

std::vector<double> split_numbers(const std::string& line, const std::string& source, std::size_t lineno) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    const char* tok = p;
    while (p < end && *p != ' ' && *p != '\t' && *p != '\r') ++p;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok, p, v);
    if (ec != std::errc() || ptr != p || !std::isfinite(v)) {
      throw ParseError(source, lineno, "not a finite number: '" + std::string(tok, p) + "'");
    }
    values.push_back(v);
  }
  return values;
}

Vec3 take3(const std::vector<double>& v, std::size_t& at) {
  Vec3 out{v[at], v[at + 1], v[at + 2]};
  at += 3;
  return out;
}

Vec3 checked_direction(const Vec3& d, const char* field, const std::string& source, std::size_t lineno) {
  const double n = norm(d);
  if (std::abs(n - 1.0) > kUnitTolerance) {
    throw DataError(source + ":" + std::to_string(lineno) + ": " + field +
                    " is not a unit vector (norm " + std::to_string(n) + ")");
  }
  return (1.0 / n) * d;
}

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
  out << buf;
}

}  // namespace

std::size_t row_width(const SequenceInfo& info) { return 18 + 6 * info.joints + 3 * info.objects; }

SequenceInfo parse_header(const std::string& line, const std::string& source) {
  std::istringstream is(line);
  std::string magic, version;
  is >> magic >> version;
  if (magic != "hoigaze-seq" || version != "v1") {
    throw ParseError(source, 1, "expected header 'hoigaze-seq v1 ...'");
  }
  SequenceInfo info;
  bool has_n = false, has_j = false;
  std::string field;
  while (is >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError(source, 1, "malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "N") {
      info.joints = parse_count(key, value, source);
      has_n = true;
    } else if (key == "J") {
      info.objects = parse_count(key, value, source);
      has_j = true;
    } else if (key == "fps") {
      info.fps = static_cast<int>(parse_count(key, value, source));
    } else if (key == "hand_mode") {
      try {
        info.hand_mode = parse_hand_mode(value);
      } catch (const DataError&) {
        throw ParseError(source, 1, "unknown hand_mode '" + value + "'");
      }
    } else {
      throw ParseError(source, 1, "unknown header field '" + key + "'");
    }
  }
  if (!has_n || !has_j) throw ParseError(source, 1, "header must declare N and J");
  if (info.joints < 1 || info.objects < 1) throw ParseError(source, 1, "N and J must be at least 1");
  return info;
}

std::string format_header(const SequenceInfo& info) {
  return "hoigaze-seq v1 N=" + std::to_string(info.joints) + " J=" + std::to_string(info.objects) +
         " fps=" + std::to_string(info.fps) + " hand_mode=" + to_string(info.hand_mode);
}

Sequence read_sequence(std::istream& in, const std::string& source,
                       const std::optional<SequenceInfo>& expected) {
  std::string line;
  if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos) {
    throw DataError(source + ": no frames");
  }
  Sequence seq;
  seq.id = std::filesystem::path(source).stem().string();
  seq.info = parse_header(line, source);
  if (expected && (expected->joints != seq.info.joints || expected->objects != seq.info.objects)) {
    throw DataError(source + ": header N=" + std::to_string(seq.info.joints) +
                    " J=" + std::to_string(seq.info.objects) + " does not match manifest N=" +
                    std::to_string(expected->joints) + " J=" + std::to_string(expected->objects));
  }
  const std::size_t width = row_width(seq.info);
  const std::size_t n = seq.info.joints, j = seq.info.objects;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<double> v = split_numbers(line, source, lineno);
    if (v.size() != width) {
      throw ParseError(source, lineno, "row has " + std::to_string(v.size()) + " values, expected " +
                                           std::to_string(width));
    }
    Frame f;
    std::size_t at = 0;
    f.head_pos = take3(v, at);
    f.head_dir = checked_direction(take3(v, at), "head_dir", source, lineno);
    f.eye_pos = take3(v, at);
    f.gaze_dir = checked_direction(take3(v, at), "gaze_dir", source, lineno);
    f.left_wrist = take3(v, at);
    f.right_wrist = take3(v, at);
    f.left_hand.reserve(n);
    f.right_hand.reserve(n);
    f.objects.reserve(j);
    for (std::size_t k = 0; k < n; ++k) f.left_hand.push_back(take3(v, at));
    for (std::size_t k = 0; k < n; ++k) f.right_hand.push_back(take3(v, at));
    for (std::size_t k = 0; k < j; ++k) f.objects.push_back(take3(v, at));
    seq.frames.push_back(std::move(f));
  }
  if (seq.frames.empty()) throw DataError(source + ": no frames");
  return seq;
}

Sequence load_sequence(const std::filesystem::path& path, const std::optional<SequenceInfo>& expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sequence file " + path.string());
  return read_sequence(in, path.string(), expected);
}

void write_sequence(std::ostream& out, const Sequence& sequence) {
  out << format_header(sequence.info) << '\n';
  for (const Frame& f : sequence.frames) {
    if (f.left_hand.size() != sequence.info.joints || f.right_hand.size() != sequence.info.joints ||
        f.objects.size() != sequence.info.objects) {
      throw DataError("frame shape disagrees with sequence header N/J");
    }
    bool first = true;
    auto emit = [&](const Vec3& p) {
      for (double c : p) {
        if (!first) out << ' ';
        first = false;
        put(out, c);
      }
    };
    emit(f.head_pos);
    emit(f.head_dir);
    emit(f.eye_pos);
    emit(f.gaze_dir);
    emit(f.left_wrist);
    emit(f.right_wrist);
    for (const Vec3& p : f.left_hand) emit(p);
    for (const Vec3& p : f.right_hand) emit(p);
    for (const Vec3& p : f.objects) emit(p);
    out << '\n';
  }
}

void save_sequence(const std::filesystem::path& path, const Sequence& sequence) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sequence file " + path.string());
  write_sequence(out, sequence);
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  DatasetManifest manifest;
  const auto base = path.parent_path();
  std::string line;
  bool have_info = false;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::filesystem::path p = line.substr(b, e - b + 1);
    if (p.is_relative()) p = base / p;

    std::ifstream seq(p);
    if (!seq) throw IoError("cannot open sequence file " + p.string());
    std::string header;
    std::getline(seq, header);
    const SequenceInfo info = parse_header(header, p.string());
    if (!have_info) {
      manifest.info = info;
      have_info = true;
    } else if (info.joints != manifest.info.joints || info.objects != manifest.info.objects) {
      throw DataError(p.string() + ": N/J differ from the rest of the manifest");
    }
    manifest.sequences.push_back(std::move(p));
  }
  return manifest;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  const auto base = path.parent_path();
  for (const auto& p : manifest.sequences) {
    std::filesystem::path rel = p;
    if (!base.empty() && p.parent_path() == base) rel = p.filename();
    out << rel.string() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hoigaze::data
