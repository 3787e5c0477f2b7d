#include "scanpath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scanpath {

namespace {

void require_equal_length(const Scanpath& a, const Scanpath& b) {
  if (a.points.size() != b.points.size()) {
    throw std::invalid_argument("scanpath lengths disagree");
  }
}

// Pearson correlation; either series being constant yields 0 by convention.
double pcc(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  if (*xmin == *xmax || *ymin == *ymax) return 0.0;
  if (std::equal(x.begin(), x.end(), y.begin())) return 1.0;  // exact unity
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double denom = std::sqrt(sxx) * std::sqrt(syy);
  if (denom == 0.0) return 0.0;
  return sxy / denom;
}

void require_sets(const ScanpathSet& s, const ScanpathSet& p) {
  if (s.paths.empty() || p.paths.empty()) {
    throw std::invalid_argument("scanpath sets must be nonempty");
  }
  const std::size_t len = s.paths.front().points.size();
  for (const auto& path : s.paths) {
    if (path.points.size() != len) throw std::invalid_argument("set has mixed path lengths");
  }
  for (const auto& path : p.paths) {
    if (path.points.size() != len) throw std::invalid_argument("sets have mixed path lengths");
  }
}

Scanpath slice_of(const Scanpath& path, int offset, int len) {
  Scanpath out;
  out.video_id = path.video_id;
  out.user_id = path.user_id;
  out.rate_hz = path.rate_hz;
  out.points.assign(path.points.begin() + offset, path.points.begin() + offset + len);
  return out;
}

}  // namespace

double orthodromic_distance(const Scanpath& a, const Scanpath& b) {
  require_equal_length(a, b);
  if (a.points.empty()) throw std::invalid_argument("orthodromic_distance: empty paths");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& p = a.points[i];
    const auto& q = b.points[i];
    if (p.phi == q.phi && p.theta == q.theta) continue;  // exact zero distance
    double c = std::cos(p.phi) * std::cos(q.phi) * std::cos(p.theta - q.theta) +
               std::sin(p.phi) * std::sin(q.phi);
    c = std::clamp(c, -1.0, 1.0);
    sum += std::acos(c);
  }
  return sum / static_cast<double>(a.points.size());
}

double temporal_correlation(const Scanpath& a, const Scanpath& b) {
  require_equal_length(a, b);
  if (a.points.size() < 2) {
    throw std::invalid_argument("temporal_correlation: need length >= 2");
  }
  const std::size_t n = a.points.size();
  std::vector<double> pa(n), pb(n), ta(n), tb(n);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i] = a.points[i].phi;
    pb[i] = b.points[i].phi;
    ta[i] = a.points[i].theta;
    tb[i] = b.points[i].theta;
  }
  return 0.5 * (pcc(pa, pb) + pcc(ta, tb));
}

double mean_tc(const ScanpathSet& set) {
  const std::size_t n = set.paths.size();
  if (n < 2) throw std::invalid_argument("mean_tc: need at least two paths");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += temporal_correlation(set.paths[i], set.paths[j]);
    }
  }
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double min_od(const ScanpathSet& truth, const ScanpathSet& predicted) {
  require_sets(truth, predicted);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : truth.paths) {
    for (const auto& p : predicted.paths) {
      best = std::min(best, orthodromic_distance(s, p));
    }
  }
  return best;
}

double max_tc(const ScanpathSet& truth, const ScanpathSet& predicted) {
  require_sets(truth, predicted);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : truth.paths) {
    for (const auto& p : predicted.paths) {
      best = std::max(best, temporal_correlation(s, p));
    }
  }
  return best;
}

std::vector<int> slice_offsets(int path_length, int slice_length) {
  if (slice_length < 2) throw std::invalid_argument("slice_offsets: slice length must be >= 2");
  if (slice_length > path_length) {
    throw std::invalid_argument("slice_offsets: slice longer than path");
  }
  const int stride = slice_length - slice_length / 2;
  const int last = path_length - slice_length;
  std::vector<int> offsets;
  for (int k = 0;; ++k) {
    const int off = std::min(k * stride, last);
    if (!offsets.empty() && off == offsets.back()) break;
    offsets.push_back(off);
    if (off == last) break;
  }
  return offsets;
}

SlicedMetrics sliced_metrics(const ScanpathSet& truth, const ScanpathSet& predicted,
                             int slice_length) {
  require_sets(truth, predicted);
  const int len = static_cast<int>(truth.paths.front().points.size());
  const std::vector<int> offsets = slice_offsets(len, slice_length);
  SlicedMetrics out;
  out.n_slices = static_cast<int>(offsets.size());
  for (int off : offsets) {
    ScanpathSet ts, ps;
    for (const auto& s : truth.paths) ts.paths.push_back(slice_of(s, off, slice_length));
    for (const auto& p : predicted.paths) ps.paths.push_back(slice_of(p, off, slice_length));
    out.smin_od += min_od(ts, ps);
    out.smax_tc += max_tc(ts, ps);
  }
  out.smin_od /= static_cast<double>(out.n_slices);
  out.smax_tc /= static_cast<double>(out.n_slices);
  return out;
}

}  // namespace scanpath
