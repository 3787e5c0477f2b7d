#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "scanpath/geometry.hpp"
#include "scanpath/metrics.hpp"
#include "scanpath/param_store.hpp"

namespace scanpath {

/// CSV with header video_id,user_id,t_index,phi_rad,theta_rad. Rows group by
/// (video, user) with consecutive t_index. Latitude outside [-pi/2, pi/2] is
/// a parse error naming the line; longitude wraps into [-pi, pi).
std::vector<Scanpath> load_scanpaths(const std::string& path, double rate_hz = 5.0,
                                     bool degrees = false);
void save_scanpaths(const std::string& path, std::span<const Scanpath> paths,
                    bool degrees = false);

/// Groups loaded paths into per-video sets.
std::map<std::string, ScanpathSet> group_by_video(std::span<const Scanpath> paths);

ErpFrame load_pnm(const std::string& path);
void save_pnm(const std::string& path, const ErpFrame& frame);

/// Loads binary P5/P6 pixmaps with zero-padded numeric names, ordered by
/// index; gaps and mixed dimensions are errors.
std::vector<ErpFrame> load_frames(const std::string& dir);

struct CheckpointBlob {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

/// Versioned container: magic "PSPM", u32 version, then named blobs
/// (u32 name length, name bytes, u32 rank, u64 dims, little-endian f64 data).
/// Scalars (model hyper-parameters) are stored as rank-0 blobs named cfg.*.
using Checkpoint = std::map<std::string, CheckpointBlob>;

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::map<std::string, double>& scalars);
Checkpoint load_checkpoint(const std::string& path);
void apply_checkpoint(const Checkpoint& ckpt, ParamStore& store);
double checkpoint_scalar(const Checkpoint& ckpt, const std::string& key);
bool checkpoint_has_scalar(const Checkpoint& ckpt, const std::string& key);

/// Plain-text key = value configuration. '#' starts a comment.
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  bool get(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Viewport spec string "HxW@FVxFH" with fields in pixels and degrees,
/// e.g. "252x484@63x112".
ViewportSpec parse_viewport(const std::string& text);

struct ManifestEntry {
  std::string video_id;
  std::string frames_dir;  // empty when the manifest says "none"
  double frame_rate = 0.0;
  std::string scanpath_csv;
  double rate_hz = 5.0;
};

/// CSV with header video_id,frames,frame_rate,scanpath,rate_hz; relative
/// paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace scanpath
