#include "scanpath/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scanpath {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

bool read_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return true;
}

bool read_u64(std::istream& in, std::uint64_t& v) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

bool read_f64(std::istream& in, double& v) {
  std::uint64_t bits;
  if (!read_u64(in, bits)) return false;
  std::memcpy(&v, &bits, 8);
  return true;
}

// Reads one PNM header token, skipping whitespace and # comments.
std::string pnm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      token.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c)) token.push_back(static_cast<char>(in.get()));
      return token;
    }
  }
  throw std::runtime_error("pnm: unexpected end of header");
}

}  // namespace

std::vector<Scanpath> load_scanpaths(const std::string& path, double rate_hz, bool degrees) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scanpath file: " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++line_no;
  const auto header = split(line, ',');
  const std::vector<std::string> expected{"video_id", "user_id", "t_index", "phi_rad",
                                          "theta_rad"};
  if (header != expected) parse_fail(path, line_no, "bad header (expected video_id,user_id,t_index,phi_rad,theta_rad)");

  std::vector<Scanpath> paths;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  const double scale = degrees ? kPi / 180.0 : 1.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) parse_fail(path, line_no, "expected 5 fields");
    long t_index = 0;
    double phi = 0.0, theta = 0.0;
    try {
      t_index = std::stol(fields[2]);
      phi = std::stod(fields[3]) * scale;
      theta = std::stod(fields[4]) * scale;
    } catch (const std::exception&) {
      parse_fail(path, line_no, "malformed numeric field");
    }
    if (!(phi >= -kPi / 2 - 1e-12 && phi <= kPi / 2 + 1e-12)) {
      parse_fail(path, line_no, "latitude " + fields[3] + " outside [-pi/2, pi/2]");
    }
    phi = std::clamp(phi, -kPi / 2, kPi / 2);

    const auto key = std::make_pair(fields[0], fields[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      Scanpath sp;
      sp.video_id = fields[0];
      sp.user_id = fields[1];
      sp.rate_hz = rate_hz;
      sp.start_time = static_cast<double>(t_index) / rate_hz;
      paths.push_back(std::move(sp));
      it = index.emplace(key, paths.size() - 1).first;
    } else {
      const Scanpath& sp = paths[it->second];
      const long expected_next =
          static_cast<long>(std::lround(sp.start_time * rate_hz)) +
          static_cast<long>(sp.points.size());
      if (t_index != expected_next) {
        parse_fail(path, line_no,
                   "t_index " + fields[2] + " not consecutive (expected " +
                       std::to_string(expected_next) + ")");
      }
    }
    paths[it->second].points.emplace_back(phi, theta);
  }
  return paths;
}

void save_scanpaths(const std::string& path, std::span<const Scanpath> paths, bool degrees) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scanpath file: " + path);
  out << "video_id,user_id,t_index,phi_rad,theta_rad\n";
  char buf[64];
  const double scale = degrees ? 180.0 / kPi : 1.0;
  for (const auto& sp : paths) {
    const long base = static_cast<long>(std::lround(sp.start_time * sp.rate_hz));
    for (std::size_t i = 0; i < sp.points.size(); ++i) {
      out << sp.video_id << ',' << sp.user_id << ',' << base + static_cast<long>(i) << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", sp.points[i].phi * scale);
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", sp.points[i].theta * scale);
      out << buf << '\n';
    }
  }
}

std::map<std::string, ScanpathSet> group_by_video(std::span<const Scanpath> paths) {
  std::map<std::string, ScanpathSet> out;
  for (const auto& p : paths) out[p.video_id].paths.push_back(p);
  return out;
}

ErpFrame load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pixmap: " + path);
  const std::string magic = pnm_token(in);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw std::runtime_error(path + ": unsupported magic '" + magic + "' (need binary P5/P6)");
  }
  const int width = std::stoi(pnm_token(in));
  const int height = std::stoi(pnm_token(in));
  const int maxval = std::stoi(pnm_token(in));
  if (maxval <= 0 || maxval > 255) {
    throw std::runtime_error(path + ": unsupported maxval " + std::to_string(maxval));
  }
  in.get();  // single whitespace after maxval
  ErpFrame frame(height, width, channels);
  in.read(reinterpret_cast<char*>(frame.samples.data()),
          static_cast<std::streamsize>(frame.samples.size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.samples.size())) {
    throw std::runtime_error(path + ": truncated pixel data");
  }
  return frame;
}

void save_pnm(const std::string& path, const ErpFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write pixmap: " + path);
  out << (frame.channels == 3 ? "P6" : "P5") << '\n'
      << frame.width << ' ' << frame.height << '\n'
      << 255 << '\n';
  out.write(reinterpret_cast<const char*>(frame.samples.data()),
            static_cast<std::streamsize>(frame.samples.size()));
}

std::vector<ErpFrame> load_frames(const std::string& dir) {
  std::vector<std::pair<long, fs::path>> indexed;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm" && ext != ".pnm") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(),
                                     [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    indexed.emplace_back(std::stol(stem), entry.path());
  }
  if (indexed.empty()) throw std::runtime_error("no P5/P6 frames found in " + dir);
  std::sort(indexed.begin(), indexed.end());
  std::vector<ErpFrame> frames;
  frames.reserve(indexed.size());
  const long first = indexed.front().first;
  for (std::size_t i = 0; i < indexed.size(); ++i) {
    const long expected = first + static_cast<long>(i);
    if (indexed[i].first != expected) {
      throw std::runtime_error("frame index " + std::to_string(expected) + " missing in " + dir);
    }
    ErpFrame frame = load_pnm(indexed[i].second.string());
    if (!frames.empty() && (frame.height != frames.front().height ||
                            frame.width != frames.front().width ||
                            frame.channels != frames.front().channels)) {
      throw std::runtime_error(indexed[i].second.string() + ": dimensions differ from sequence");
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::map<std::string, double>& scalars) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write("PSPM", 4);
  write_u32(out, 1);
  for (const auto& [key, value] : scalars) {
    const std::string name = "cfg." + key;
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, 0);  // rank-0 scalar
    write_f64(out, value);
  }
  const auto values = store.values();
  for (const auto& entry : store.entries()) {
    write_u32(out, static_cast<std::uint32_t>(entry.name.size()));
    out.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
    write_u32(out, static_cast<std::uint32_t>(entry.shape.size()));
    for (std::size_t d : entry.shape) write_u64(out, d);
    for (std::size_t i = 0; i < entry.size; ++i) write_f64(out, values[entry.offset + i]);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "PSPM", 4) != 0) {
    throw std::runtime_error(path + ": not a PSPM checkpoint");
  }
  std::uint32_t version = 0;
  if (!read_u32(in, version) || version != 1) {
    throw std::runtime_error(path + ": unsupported checkpoint version");
  }
  Checkpoint ckpt;
  std::uint32_t name_len = 0;
  while (read_u32(in, name_len)) {
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw std::runtime_error(path + ": truncated blob name");
    std::uint32_t rank = 0;
    if (!read_u32(in, rank)) throw std::runtime_error(path + ": truncated blob rank");
    CheckpointBlob blob;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      std::uint64_t dim = 0;
      if (!read_u64(in, dim)) throw std::runtime_error(path + ": truncated blob dims");
      blob.shape.push_back(static_cast<std::size_t>(dim));
      count *= static_cast<std::size_t>(dim);
    }
    blob.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (!read_f64(in, blob.data[i])) throw std::runtime_error(path + ": truncated blob data");
    }
    ckpt.emplace(std::move(name), std::move(blob));
  }
  return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, ParamStore& store) {
  auto values = store.values();
  for (const auto& entry : store.entries()) {
    const auto it = ckpt.find(entry.name);
    if (it == ckpt.end()) {
      throw std::runtime_error("checkpoint is missing parameter " + entry.name);
    }
    if (it->second.data.size() != entry.size) {
      throw std::runtime_error("checkpoint parameter " + entry.name + " has wrong size");
    }
    std::copy(it->second.data.begin(), it->second.data.end(), values.begin() +
                                                                  static_cast<std::ptrdiff_t>(entry.offset));
  }
}

bool checkpoint_has_scalar(const Checkpoint& ckpt, const std::string& key) {
  return ckpt.count("cfg." + key) > 0;
}

double checkpoint_scalar(const Checkpoint& ckpt, const std::string& key) {
  const auto it = ckpt.find("cfg." + key);
  if (it == ckpt.end() || it->second.data.size() != 1) {
    throw std::runtime_error("checkpoint is missing scalar cfg." + key);
  }
  return it->second.data[0];
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stod(it->second);
}

int Config::get(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stoi(it->second);
}

bool Config::get(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key " + key + ": expected boolean, got '" + v + "'");
}

ViewportSpec parse_viewport(const std::string& text) {
  int h = 0, w = 0;
  double fv = 0.0, fh = 0.0;
  if (std::sscanf(text.c_str(), "%dx%d@%lfx%lf", &h, &w, &fv, &fh) != 4) {
    throw std::runtime_error("bad viewport spec '" + text + "' (expected HxW@FVxFH)");
  }
  return {h, w, fv * kPi / 180.0, fh * kPi / 180.0};
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty manifest");
  ++line_no;
  const auto header = split(line, ',');
  const std::vector<std::string> expected{"video_id", "frames", "frame_rate", "scanpath",
                                          "rate_hz"};
  if (header != expected) {
    parse_fail(path, line_no, "bad header (expected video_id,frames,frame_rate,scanpath,rate_hz)");
  }
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) parse_fail(path, line_no, "expected 5 fields");
    ManifestEntry entry;
    entry.video_id = fields[0];
    if (fields[1] != "none" && !fields[1].empty()) {
      entry.frames_dir = (base / fields[1]).string();
      if (!fs::exists(entry.frames_dir)) {
        parse_fail(path, line_no, "frames directory does not exist: " + entry.frames_dir);
      }
    }
    try {
      entry.frame_rate = std::stod(fields[2]);
      entry.rate_hz = std::stod(fields[4]);
    } catch (const std::exception&) {
      parse_fail(path, line_no, "malformed rate field");
    }
    if (!(entry.rate_hz > 0.0)) parse_fail(path, line_no, "rate_hz must be positive");
    entry.scanpath_csv = (base / fields[3]).string();
    if (!fs::exists(entry.scanpath_csv)) {
      parse_fail(path, line_no, "scanpath file does not exist: " + entry.scanpath_csv);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace scanpath
