#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scanpath/context.hpp"
#include "scanpath/io.hpp"
#include "scanpath/metrics.hpp"
#include "scanpath/sampler.hpp"
#include "scanpath/synth.hpp"
#include "scanpath/train.hpp"

namespace fs = std::filesystem;
using namespace scanpath;

namespace {

constexpr double kPi = 3.14159265358979323846;

ModelConfig model_config_from(const Config& cfg) {
  ModelConfig mc;
  mc.history_r = cfg.get("history.R", 5);
  mc.horizon_s = cfg.get("horizon.S", 5);
  mc.mixture_k = cfg.get("model.K", 3);
  mc.cv = cfg.get("model.cv", 128);
  mc.ch = cfg.get("model.ch", 128);
  mc.cc = cfg.get("model.cc", 32);
  mc.head_width = cfg.get("model.head_width", 128);
  mc.visual_blocks = cfg.get("model.visual_blocks", 3);
  mc.path_anchor_blocks = cfg.get("model.path_anchor_blocks", 1);
  mc.path_step_blocks = cfg.get("model.path_step_blocks", 4);
  mc.causal_blocks = cfg.get("model.causal_blocks", 4);
  mc.head_blocks = cfg.get("model.head_blocks", 2);
  mc.causal_embed = cfg.get("model.causal_embed", 32);
  mc.pool_rows = cfg.get("model.pool_rows", 8);
  mc.pool_cols = cfg.get("model.pool_cols", 14);
  mc.pool_channels = cfg.get("model.pool_channels", 16);
  mc.lrelu_slope = cfg.get("model.lrelu_slope", 0.01);
  mc.variance_init_bias = cfg.get("model.variance_init_bias", 25.0);
  mc.init_seed = static_cast<std::uint64_t>(cfg.get("model.init_seed", 1));
  return mc;
}

FitConfig fit_config_from(const Config& cfg) {
  FitConfig fc;
  fc.lr = cfg.get("train.lr", 1e-4);
  fc.batch = cfg.get("train.batch", 16);
  fc.max_epochs = cfg.get("train.epochs", 60);
  fc.seed = static_cast<std::uint64_t>(cfg.get("train.seed", 7));
  fc.delta = cfg.get("quantizer.delta", 0.2);
  fc.noise_half_range_deltas = cfg.get("noise.half_range", 1.0);
  fc.plateau_min_delta_bits = cfg.get("train.plateau_bits", 0.01);
  fc.plateau_patience = cfg.get("train.plateau_epochs", 5);
  fc.threads = cfg.get("train.threads", 1);
  fc.verbose = true;
  return fc;
}

std::map<std::string, double> checkpoint_scalars(const ModelConfig& mc, const ViewportSpec& vp,
                                                 double delta, double rate_hz, double pid_ku,
                                                 double pid_pu) {
  return {{"history_r", static_cast<double>(mc.history_r)},
          {"horizon_s", static_cast<double>(mc.horizon_s)},
          {"mixture_k", static_cast<double>(mc.mixture_k)},
          {"cv", static_cast<double>(mc.cv)},
          {"ch", static_cast<double>(mc.ch)},
          {"cc", static_cast<double>(mc.cc)},
          {"head_width", static_cast<double>(mc.head_width)},
          {"visual_blocks", static_cast<double>(mc.visual_blocks)},
          {"path_anchor_blocks", static_cast<double>(mc.path_anchor_blocks)},
          {"path_step_blocks", static_cast<double>(mc.path_step_blocks)},
          {"causal_blocks", static_cast<double>(mc.causal_blocks)},
          {"head_blocks", static_cast<double>(mc.head_blocks)},
          {"causal_embed", static_cast<double>(mc.causal_embed)},
          {"pool_rows", static_cast<double>(mc.pool_rows)},
          {"pool_cols", static_cast<double>(mc.pool_cols)},
          {"pool_channels", static_cast<double>(mc.pool_channels)},
          {"lrelu_slope", mc.lrelu_slope},
          {"variance_init_bias", mc.variance_init_bias},
          {"init_seed", static_cast<double>(mc.init_seed)},
          {"delta", delta},
          {"viewport_h", static_cast<double>(vp.height_px)},
          {"viewport_w", static_cast<double>(vp.width_px)},
          {"fov_v", vp.fov_v},
          {"fov_h", vp.fov_h},
          {"rate_hz", rate_hz},
          {"pid_ku", pid_ku},
          {"pid_pu", pid_pu}};
}

struct LoadedModel {
  std::unique_ptr<ScanpathModel> model;
  ViewportSpec viewport;
  double delta = 0.2;
  double rate_hz = 5.0;
  double pid_ku = 60.0;
  double pid_pu = 0.29;
};

LoadedModel model_from_checkpoint(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  ModelConfig mc;
  mc.history_r = static_cast<int>(checkpoint_scalar(ckpt, "history_r"));
  mc.horizon_s = static_cast<int>(checkpoint_scalar(ckpt, "horizon_s"));
  mc.mixture_k = static_cast<int>(checkpoint_scalar(ckpt, "mixture_k"));
  mc.cv = static_cast<int>(checkpoint_scalar(ckpt, "cv"));
  mc.ch = static_cast<int>(checkpoint_scalar(ckpt, "ch"));
  mc.cc = static_cast<int>(checkpoint_scalar(ckpt, "cc"));
  mc.head_width = static_cast<int>(checkpoint_scalar(ckpt, "head_width"));
  mc.visual_blocks = static_cast<int>(checkpoint_scalar(ckpt, "visual_blocks"));
  mc.path_anchor_blocks = static_cast<int>(checkpoint_scalar(ckpt, "path_anchor_blocks"));
  mc.path_step_blocks = static_cast<int>(checkpoint_scalar(ckpt, "path_step_blocks"));
  mc.causal_blocks = static_cast<int>(checkpoint_scalar(ckpt, "causal_blocks"));
  mc.head_blocks = static_cast<int>(checkpoint_scalar(ckpt, "head_blocks"));
  mc.causal_embed = static_cast<int>(checkpoint_scalar(ckpt, "causal_embed"));
  mc.pool_rows = static_cast<int>(checkpoint_scalar(ckpt, "pool_rows"));
  mc.pool_cols = static_cast<int>(checkpoint_scalar(ckpt, "pool_cols"));
  mc.pool_channels = static_cast<int>(checkpoint_scalar(ckpt, "pool_channels"));
  mc.lrelu_slope = checkpoint_scalar(ckpt, "lrelu_slope");
  mc.variance_init_bias = checkpoint_scalar(ckpt, "variance_init_bias");
  mc.init_seed = static_cast<std::uint64_t>(checkpoint_scalar(ckpt, "init_seed"));

  LoadedModel out;
  out.model = std::make_unique<ScanpathModel>(mc);
  apply_checkpoint(ckpt, out.model->params());
  out.viewport = ViewportSpec(static_cast<int>(checkpoint_scalar(ckpt, "viewport_h")),
                              static_cast<int>(checkpoint_scalar(ckpt, "viewport_w")),
                              checkpoint_scalar(ckpt, "fov_v"), checkpoint_scalar(ckpt, "fov_h"));
  out.delta = checkpoint_scalar(ckpt, "delta");
  out.rate_hz = checkpoint_scalar(ckpt, "rate_hz");
  out.pid_ku = checkpoint_scalar(ckpt, "pid_ku");
  out.pid_pu = checkpoint_scalar(ckpt, "pid_pu");
  return out;
}

// Resamples a frame sequence onto the scanpath's sampling grid.
std::vector<ErpFrame> align_frames(const std::vector<ErpFrame>& frames, double frame_rate,
                                   double rate_hz, std::size_t count) {
  std::vector<ErpFrame> out;
  if (frames.empty() || frame_rate <= 0.0) return out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * frame_rate / rate_hz));
    if (idx >= frames.size()) break;
    out.push_back(frames[idx]);
  }
  return out;
}

std::vector<TrainSample> samples_from_manifest(const ScanpathModel& model,
                                               const std::vector<ManifestEntry>& manifest,
                                               const ViewportSpec& viewport, int stride) {
  std::vector<TrainSample> samples;
  for (const auto& entry : manifest) {
    const auto paths = load_scanpaths(entry.scanpath_csv, entry.rate_hz);
    std::vector<ErpFrame> frames;
    if (!entry.frames_dir.empty()) {
      const auto raw = load_frames(entry.frames_dir);
      std::size_t longest = 0;
      for (const auto& p : paths) longest = std::max(longest, p.points.size());
      frames = align_frames(raw, entry.frame_rate, entry.rate_hz, longest);
    }
    for (const auto& path : paths) {
      auto s = make_samples(model, path.points, frames, viewport, stride);
      samples.insert(samples.end(), s.begin(), s.end());
    }
  }
  return samples;
}

GmmParams generator_from_config(const Config& cfg) {
  auto parse_list = [&](const std::string& key) {
    std::vector<double> out;
    std::string text = cfg.get(key, std::string());
    if (text.empty()) throw std::runtime_error("synth spec is missing " + key);
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t next = text.find(',', pos);
      if (next == std::string::npos) next = text.size();
      out.push_back(std::stod(text.substr(pos, next - pos)));
      pos = next + 1;
    }
    return out;
  };
  const auto weights = parse_list("synth.weights");
  const auto means_flat = parse_list("synth.means");
  const auto vars_flat = parse_list("synth.variances");
  const std::size_t k = weights.size();
  if (means_flat.size() != 2 * k || vars_flat.size() != 2 * k) {
    throw std::runtime_error("synth spec: means/variances must hold 2K values");
  }
  std::vector<std::array<double, 2>> means(k), vars(k);
  for (std::size_t i = 0; i < k; ++i) {
    means[i] = {means_flat[2 * i], means_flat[2 * i + 1]};
    vars[i] = {vars_flat[2 * i], vars_flat[2 * i + 1]};
  }
  return {weights, means, vars};
}

int run_fit(const std::string& manifest_path, const std::string& config_path,
            const std::string& out_path) {
  const Config cfg = config_path.empty() ? Config() : Config::load(config_path);
  const ViewportSpec viewport =
      parse_viewport(cfg.get("viewport", std::string("252x484@63x112")));
  const ModelConfig mc = model_config_from(cfg);
  ScanpathModel model(mc);
  std::fprintf(stdout, "model parameters: %zu\n", model.parameter_count());

  const auto manifest = load_manifest(manifest_path);
  const int stride = cfg.get("train.stride", 1);
  const auto samples = samples_from_manifest(model, manifest, viewport, stride);
  std::fprintf(stdout, "training samples: %zu\n", samples.size());

  const FitConfig fc = fit_config_from(cfg);
  train(model, samples, fc);

  const double rate_hz = manifest.empty() ? 5.0 : manifest.front().rate_hz;
  save_checkpoint(out_path, model.params(),
                  checkpoint_scalars(mc, viewport, fc.delta, rate_hz,
                                     cfg.get("pid.ku", 60.0), cfg.get("pid.pu", 0.29)));
  std::fprintf(stdout, "checkpoint written to %s\n", out_path.c_str());
  return 0;
}

int run_sample(const std::string& ckpt_path, const std::string& manifest_path,
               const std::string& video, const std::string& user, int rounds,
               std::uint64_t seed, const std::string& mode, int beam_width, int count,
               const std::string& config_path, const std::string& out_path, bool degrees) {
  LoadedModel lm = model_from_checkpoint(ckpt_path);
  const Config cfg = config_path.empty() ? Config() : Config::load(config_path);
  const double ku = cfg.get("pid.ku", lm.pid_ku);
  const double pu = cfg.get("pid.pu", lm.pid_pu);

  SamplerConfig sc;
  sc.rounds = rounds;
  sc.delta = lm.delta;
  sc.gains = PidGains::from_ultimate(ku, pu);
  sc.pid.dt_scaled = cfg.get("pid.dt_scaled", false);
  sc.pid.anti_windup = cfg.get("pid.anti_windup", 1000.0);
  sc.beam_width = beam_width;
  if (mode == "pid") {
    sc.mode = SamplerMode::Pid;
  } else if (mode == "random") {
    sc.mode = SamplerMode::Random;
  } else if (mode == "max") {
    sc.mode = SamplerMode::Max;
  } else if (mode == "beam") {
    sc.mode = SamplerMode::Beam;
  } else {
    std::fprintf(stderr, "unknown sampler mode '%s'\n", mode.c_str());
    return 2;
  }

  const auto manifest = load_manifest(manifest_path);
  const ManifestEntry* entry = nullptr;
  for (const auto& e : manifest) {
    if (e.video_id == video) entry = &e;
  }
  if (entry == nullptr) {
    std::fprintf(stderr, "video '%s' not in manifest\n", video.c_str());
    return 2;
  }
  const auto paths = load_scanpaths(entry->scanpath_csv, entry->rate_hz);
  const Scanpath* source = nullptr;
  for (const auto& p : paths) {
    if (p.user_id == user) source = &p;
  }
  if (source == nullptr) {
    std::fprintf(stderr, "user '%s' not found for video '%s'\n", user.c_str(), video.c_str());
    return 2;
  }
  const int r = lm.model->config().history_r;
  if (static_cast<int>(source->points.size()) < 2 * r + 1) {
    std::fprintf(stderr, "scanpath too short for history (need %d viewpoints)\n", 2 * r + 1);
    return 2;
  }
  const std::vector<SphericalPoint> history(source->points.begin(),
                                            source->points.begin() + 2 * r + 1);
  std::vector<ErpFrame> frames;
  if (!entry->frames_dir.empty()) {
    const auto raw = load_frames(entry->frames_dir);
    const std::size_t needed =
        history.size() + static_cast<std::size_t>(rounds) * lm.model->config().horizon_s;
    frames = align_frames(raw, entry->frame_rate, entry->rate_hz, needed);
  }

  std::vector<Scanpath> generated;
  for (int i = 0; i < count; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    Scanpath out = generate_scanpath(*lm.model, history, frames, rounds, sc, rng,
                                     lm.viewport, entry->rate_hz);
    out.video_id = video;
    out.user_id = user + "-gen" + std::to_string(i);
    out.start_time = static_cast<double>(history.size()) / entry->rate_hz;
    generated.push_back(std::move(out));
  }
  save_scanpaths(out_path, generated, degrees);
  std::fprintf(stdout, "wrote %d scanpath(s) of %zu viewpoints to %s\n", count,
               generated.front().points.size(), out_path.c_str());
  return 0;
}

// Trims every truth path to the prediction's time range, aligned by t_index.
ScanpathSet align_truth(const ScanpathSet& truth, const ScanpathSet& pred) {
  const auto& probe = pred.paths.front();
  const long start = static_cast<long>(std::lround(probe.start_time * probe.rate_hz));
  const std::size_t len = probe.points.size();
  ScanpathSet out;
  for (const auto& t : truth.paths) {
    const long t_start = static_cast<long>(std::lround(t.start_time * t.rate_hz));
    const long offset = start - t_start;
    if (offset < 0 || t.points.size() < static_cast<std::size_t>(offset) + len) {
      throw std::runtime_error("truth scanpath (user " + t.user_id +
                               ") does not cover the predicted time range");
    }
    Scanpath trimmed = t;
    trimmed.points.assign(t.points.begin() + offset, t.points.begin() + offset + static_cast<long>(len));
    out.paths.push_back(std::move(trimmed));
  }
  return out;
}

int run_eval(const std::string& pred_path, const std::string& truth_path,
             const std::vector<int>& slices, bool kv, bool degrees) {
  const auto pred_all = load_scanpaths(pred_path, 5.0, degrees);
  const auto truth_all = load_scanpaths(truth_path, 5.0, degrees);
  const auto pred_by_video = group_by_video(pred_all);
  const auto truth_by_video = group_by_video(truth_all);

  int evaluated = 0;
  std::map<std::string, double> totals;
  std::fprintf(stdout, "%-16s %10s %10s", "video", "minOD", "maxTC");
  for (int ts : slices) {
    std::fprintf(stdout, " %9s-%d %9s-%d", "SminOD", ts, "SmaxTC", ts);
  }
  std::fprintf(stdout, "\n");
  for (const auto& [video, pred_set] : pred_by_video) {
    const auto it = truth_by_video.find(video);
    if (it == truth_by_video.end()) continue;
    const ScanpathSet truth_set = align_truth(it->second, pred_set);
    const double od = min_od(truth_set, pred_set);
    const double tc = max_tc(truth_set, pred_set);
    totals["minOD"] += od;
    totals["maxTC"] += tc;
    std::fprintf(stdout, "%-16s %10.4f %10.4f", video.c_str(), od, tc);
    for (int ts : slices) {
      const SlicedMetrics sm = sliced_metrics(truth_set, pred_set, ts);
      totals["SminOD-" + std::to_string(ts)] += sm.smin_od;
      totals["SmaxTC-" + std::to_string(ts)] += sm.smax_tc;
      std::fprintf(stdout, " %11.4f %11.4f", sm.smin_od, sm.smax_tc);
    }
    std::fprintf(stdout, "\n");
    ++evaluated;
  }
  if (evaluated == 0) {
    std::fprintf(stderr, "no common videos between prediction and truth files\n");
    return 2;
  }
  if (kv) {
    for (const auto& [key, value] : totals) {
      std::fprintf(stdout, "%s=%.17g\n", key.c_str(), value / evaluated);
    }
  }
  return 0;
}

int run_codelength(const std::string& ckpt_path, const std::string& manifest_path,
                   const std::string& config_path) {
  LoadedModel lm = model_from_checkpoint(ckpt_path);
  const Config cfg = config_path.empty() ? Config() : Config::load(config_path);
  const auto manifest = load_manifest(manifest_path);
  const int stride = cfg.get("eval.stride", 1);
  const auto samples = samples_from_manifest(*lm.model, manifest, lm.viewport, stride);
  if (samples.empty()) {
    std::fprintf(stderr, "manifest produced no evaluation windows\n");
    return 2;
  }
  const double bits = evaluate_bits(*lm.model, samples, lm.delta);
  std::fprintf(stdout, "windows=%zu\n", samples.size());
  std::fprintf(stdout, "bits_per_viewpoint=%.6f\n", bits);
  return 0;
}

int run_project(const std::string& frames_dir, const std::string& scanpath_path,
                const std::string& spec_text, const std::string& out_dir, bool degrees) {
  const ViewportSpec spec = parse_viewport(spec_text);
  const auto frames = load_frames(frames_dir);
  const auto paths = load_scanpaths(scanpath_path, 5.0, degrees);
  fs::create_directories(out_dir);
  std::size_t written = 0;
  for (const auto& path : paths) {
    const fs::path dir = fs::path(out_dir) / (path.video_id + "_" + path.user_id);
    fs::create_directories(dir);
    const long base = static_cast<long>(std::lround(path.start_time * path.rate_hz));
    for (std::size_t i = 0; i < path.points.size(); ++i) {
      const auto frame_idx = static_cast<std::size_t>(base + static_cast<long>(i));
      if (frame_idx >= frames.size()) break;
      const ErpFrame vp = extract_viewport(frames[frame_idx], path.points[i], spec);
      char name[32];
      std::snprintf(name, sizeof(name), "%06zu.%s", frame_idx, vp.channels == 3 ? "ppm" : "pgm");
      save_pnm((dir / name).string(), vp);
      ++written;
    }
  }
  std::fprintf(stdout, "wrote %zu viewport(s) under %s\n", written, out_dir.c_str());
  return written == 0 ? 2 : 0;
}

int run_synth(const std::string& spec_path, const std::string& out_path, bool degrees) {
  const Config cfg = Config::load(spec_path);
  SyntheticSpec spec;
  spec.generator = generator_from_config(cfg);
  spec.path_count = cfg.get("synth.count", 100);
  spec.path_length = cfg.get("synth.length", 25);
  spec.seed = static_cast<std::uint64_t>(cfg.get("synth.seed", 1));
  spec.rate_hz = cfg.get("rate.hz", 5.0);
  spec.delta = cfg.get("quantizer.delta", 0.2);
  spec.viewport = parse_viewport(cfg.get("viewport", std::string("252x484@63x112")));
  spec.random_start = cfg.get("synth.random_start", true);
  spec.video_id = cfg.get("synth.video_id", std::string("synthetic"));
  const SynthResult result = synthesize(spec);
  save_scanpaths(out_path, result.paths, degrees);
  std::fprintf(stdout, "paths=%d length=%d\n", spec.path_count, spec.path_length);
  std::fprintf(stdout, "generator_entropy_bits=%.6f\n", result.entropy_bits);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoramic scanpath prediction via expected code length minimization"};
  app.require_subcommand(1);

  std::string manifest, config_path, out_path, ckpt, video, user, mode = "pid";
  std::string pred_path, truth_path, frames_dir, scanpath_path, spec_text;
  int rounds = 1, beam_width = 1, count = 1;
  std::uint64_t seed = 1;
  std::vector<int> slices;
  bool kv = false, degrees = false;

  auto* fit = app.add_subcommand("fit", "Train the probability model on a dataset");
  fit->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  fit->add_option("--config", config_path, "key = value configuration file");
  fit->add_option("--out", out_path, "output checkpoint path")->required();

  auto* sample = app.add_subcommand("sample", "Generate scanpaths from a trained model");
  sample->add_option("--ckpt", ckpt, "model checkpoint")->required();
  sample->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  sample->add_option("--video", video, "video id")->required();
  sample->add_option("--user", user, "user id providing the history prefix")->required();
  sample->add_option("--rounds", rounds, "sampling rounds (S viewpoints each)");
  sample->add_option("--seed", seed, "random seed");
  sample->add_option("--mode", mode, "pid|random|max|beam");
  sample->add_option("--beam-width", beam_width, "beam width for --mode beam");
  sample->add_option("--count", count, "number of scanpaths (seeds seed..seed+count-1)");
  sample->add_option("--config", config_path, "optional config overriding PID gains");
  sample->add_option("--out", out_path, "output scanpath CSV")->required();
  sample->add_flag("--degrees", degrees, "write angles in degrees");

  auto* eval = app.add_subcommand("eval", "Set-to-set metrics between two scanpath files");
  eval->add_option("--pred", pred_path, "predicted scanpaths CSV")->required();
  eval->add_option("--truth", truth_path, "ground-truth scanpaths CSV")->required();
  eval->add_option("--slice", slices, "slice length(s) for SminOD/SmaxTC");
  eval->add_flag("--kv", kv, "also print machine-readable key=value lines");
  eval->add_flag("--degrees", degrees, "input angles are in degrees");

  auto* codelength = app.add_subcommand("codelength", "Held-out bits per viewpoint");
  codelength->add_option("--ckpt", ckpt, "model checkpoint")->required();
  codelength->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  codelength->add_option("--config", config_path, "optional config (eval.stride)");

  auto* project = app.add_subcommand("project", "Extract viewports along a scanpath");
  project->add_option("--frames", frames_dir, "directory of ERP frames (P5/P6)")->required();
  project->add_option("--scanpath", scanpath_path, "scanpath CSV")->required();
  project->add_option("--spec", spec_text, "viewport spec HxW@FVxFH (degrees)")->required();
  project->add_option("--out", out_path, "output directory")->required();
  project->add_flag("--degrees", degrees, "input angles are in degrees");

  auto* synth = app.add_subcommand("synth", "Generate synthetic scanpaths from a known GMM");
  synth->add_option("--spec", spec_text, "synthetic generator config file")->required();
  synth->add_option("--out", out_path, "output scanpath CSV")->required();
  synth->add_flag("--degrees", degrees, "write angles in degrees");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return run_fit(manifest, config_path, out_path);
    if (sample->parsed()) {
      return run_sample(ckpt, manifest, video, user, rounds, seed, mode, beam_width, count,
                        config_path, out_path, degrees);
    }
    if (eval->parsed()) return run_eval(pred_path, truth_path, slices, kv, degrees);
    if (codelength->parsed()) return run_codelength(ckpt, manifest, config_path);
    if (project->parsed()) {
      return run_project(frames_dir, scanpath_path, spec_text, out_path, degrees);
    }
    if (synth->parsed()) return run_synth(spec_text, out_path, degrees);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
