#pragma once

#include <string>
#include <vector>

#include "scanpath/geometry.hpp"

namespace scanpath {

/// Time-ordered viewpoints at a fixed sampling rate.
struct Scanpath {
  std::string video_id;
  std::string user_id;
  std::vector<SphericalPoint> points;
  double rate_hz = 5.0;
  double start_time = 0.0;

  std::size_t length() const { return points.size(); }
};

/// Equal-length scanpaths for one video.
struct ScanpathSet {
  std::vector<Scanpath> paths;
};

/// Mean great-circle distance between aligned steps, in radians.
double orthodromic_distance(const Scanpath& a, const Scanpath& b);

/// Mean of the Pearson correlations of the latitude and longitude series.
/// A constant series contributes 0 on its axis.
double temporal_correlation(const Scanpath& a, const Scanpath& b);

/// Average TC over all unordered pairs in the set (diversity measure).
double mean_tc(const ScanpathSet& set);

/// Best-case set-to-set metrics over all |S| x |S_hat| pairs.
double min_od(const ScanpathSet& truth, const ScanpathSet& predicted);
double max_tc(const ScanpathSet& truth, const ScanpathSet& predicted);

struct SlicedMetrics {
  double smin_od = 0.0;
  double smax_tc = 0.0;
  int n_slices = 0;
};

/// Slice start offsets: multiples of (T_s - floor(T_s/2)) with the final
/// offset clipped to T - T_s so every slice is full.
std::vector<int> slice_offsets(int path_length, int slice_length);

/// Mean of the per-slice best-case metrics over overlapping slices.
SlicedMetrics sliced_metrics(const ScanpathSet& truth, const ScanpathSet& predicted,
                             int slice_length);

}  // namespace scanpath
