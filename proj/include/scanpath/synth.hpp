#pragma once

#include <cstdint>
#include <vector>

#include "scanpath/entropy.hpp"
#include "scanpath/metrics.hpp"

namespace scanpath {

/// Random-walk generator: per-step uv increments drawn from a known GMM and
/// applied in the frame of the previous viewpoint.
struct SyntheticSpec {
  GmmParams generator;
  int path_count = 100;
  int path_length = 25;
  std::uint64_t seed = 1;
  double rate_hz = 5.0;
  double delta = 0.2;
  ViewportSpec viewport;
  bool random_start = true;     // start viewpoints scattered off the poles
  SphericalPoint start{0.0, 0.0};
  std::string video_id = "synthetic";
};

struct SynthResult {
  std::vector<Scanpath> paths;
  double entropy_bits = 0.0;  // exact bits/step of the quantized generator
};

/// Exhaustive -sum p log2 p over lattice bins within +-8 sigma of every
/// component (joint 2D bins).
double generator_entropy_bits(const GmmParams& generator, double delta);

SynthResult synthesize(const SyntheticSpec& spec);

}  // namespace scanpath
