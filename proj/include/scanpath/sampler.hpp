#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scanpath/context.hpp"
#include "scanpath/entropy.hpp"
#include "scanpath/metrics.hpp"

namespace scanpath {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  /// K_p = 0.6 K_u, K_i = 2 K_u / P_u, K_d = K_u P_u / 8.
  static PidGains from_ultimate(double ku, double pu);
};

/// Proxy-viewer state in uv pixels; dt is the sampling interval in seconds.
struct PidState {
  UvPoint position{0.0, 0.0};
  UvPoint velocity{0.0, 0.0};
  UvPoint acceleration{0.0, 0.0};
  UvPoint error_integral{0.0, 0.0};
  UvPoint prev_error{0.0, 0.0};
  double dt = 0.2;
};

struct PidOptions {
  /// False: integral and derivative use raw error sums/differences (the
  /// literal equation). True: integral scaled by dt, derivative by 1/dt.
  bool dt_scaled = false;
  double anti_windup = 1e3;  // |sum e| clamp per axis, in pixels
};

/// One controller step: kinematic position/velocity update with the previous
/// acceleration, then acceleration from the PID terms of the new error.
PidState pid_step(const PidState& state, const UvPoint& reference, const PidGains& gains,
                  const PidOptions& options = {});

/// Draws a lattice bin: component from the mixture weights, then per
/// dimension an inverse-transform draw over the discretized Gaussian
/// restricted to +-8 sigma (renormalized).
BinIndex sample_reference(const GmmParams& params, const QuantizerSpec& spec, Rng& rng);

/// Highest-mass lattice bin over the +-8 sigma support of all components.
BinIndex argmax_bin(const GmmParams& params, const QuantizerSpec& spec);

enum class SamplerMode { Pid, Random, Max, Beam };

struct SamplerConfig {
  int rounds = 1;
  SamplerMode mode = SamplerMode::Pid;
  int beam_width = 1;
  double delta = 0.2;
  PidGains gains = PidGains::from_ultimate(60.0, 0.29);
  PidOptions pid;
  bool velocity_from_history = true;
};

struct RoundResult {
  std::vector<UvPoint> emitted;  // S viewpoints in the anchor's uv frame
  PidState state;                // controller state after the last step
  int clamped = 0;               // positions clamped to the FoV rectangle
};

/// One sampling round of S viewpoints via ancestral sampling; emitted points
/// are the PID positions (references stay internal). Non-PID modes emit the
/// drawn/argmax/beam bin centers directly.
RoundResult generate_round(const ScanpathModel& model, const ModelInput& input, PidState state,
                           const SamplerConfig& cfg, Rng& rng, const ViewportSpec& spec);

/// Multi-round generation: after each round the history window is rebuilt
/// from the emitted viewpoints (re-extracting viewports when frames are
/// provided), the causal context clears, the average speed transfers into
/// the new anchor frame, and the acceleration resets to zero.
Scanpath generate_scanpath(const ScanpathModel& model, const std::vector<SphericalPoint>& history,
                           std::span<const ErpFrame> frames, int rounds,
                           const SamplerConfig& cfg, Rng& rng, const ViewportSpec& spec,
                           double rate_hz);

}  // namespace scanpath
