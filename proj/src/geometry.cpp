#include "scanpath/geometry.hpp"

#include <cmath>

namespace scanpath {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into [-pi, pi).
double wrap_longitude(double t) {
  double w = std::fmod(t + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

}  // namespace

SphericalPoint::SphericalPoint(double phi_in, double theta_in) {
  if (!std::isfinite(phi_in) || !std::isfinite(theta_in)) {
    throw std::invalid_argument("SphericalPoint: coordinates must be finite");
  }
  double p = std::remainder(phi_in, 2.0 * kPi);  // [-pi, pi]
  double t = theta_in;
  if (p > 0.5 * kPi) {
    p = kPi - p;
    t += kPi;
  } else if (p < -0.5 * kPi) {
    p = -kPi - p;
    t += kPi;
  }
  phi = p;
  theta = wrap_longitude(t);
}

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

ViewportSpec::ViewportSpec(int height, int width, double fov_v_rad, double fov_h_rad)
    : height_px(height), width_px(width), fov_v(fov_v_rad), fov_h(fov_h_rad) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("ViewportSpec: dimensions must be >= 1");
  }
  if (!(fov_h_rad > 0.0) || !(fov_h_rad < kPi)) {
    throw std::invalid_argument("ViewportSpec: horizontal FoV must lie in (0, pi)");
  }
  radius = 0.5 * static_cast<double>(width) / std::tan(0.5 * fov_h_rad);
}

ErpFrame::ErpFrame(int h, int w, int c) : height(h), width(w), channels(c) {
  if (h < 1 || w < 1 || (c != 1 && c != 3)) {
    throw std::invalid_argument("ErpFrame: bad dimensions");
  }
  samples.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                     static_cast<std::size_t>(c),
                 0);
}

Vec3 RotationMatrix::apply(const Vec3& q) const {
  return {m[0] * q.x + m[1] * q.y + m[2] * q.z,
          m[3] * q.x + m[4] * q.y + m[5] * q.z,
          m[6] * q.x + m[7] * q.y + m[8] * q.z};
}

Vec3 RotationMatrix::apply_transposed(const Vec3& q) const {
  return {m[0] * q.x + m[3] * q.y + m[6] * q.z,
          m[1] * q.x + m[4] * q.y + m[7] * q.z,
          m[2] * q.x + m[5] * q.y + m[8] * q.z};
}

Vec3 sph_to_vec3(const SphericalPoint& p, double radius) {
  const double cp = std::cos(p.phi);
  return {radius * cp * std::cos(p.theta), radius * cp * std::sin(p.theta),
          radius * std::sin(p.phi)};
}

SphericalPoint vec3_to_sph(const Vec3& q) {
  const double n = q.norm();
  if (!(n > 0.0)) {
    throw std::invalid_argument("vec3_to_sph: zero vector has no direction");
  }
  return SphericalPoint(std::asin(q.z / n), std::atan2(q.y, q.x));
}

Vec3 rodrigues_rotate(const Vec3& q, const Vec3& axis, double omega) {
  const double n = axis.norm();
  if (std::abs(n - 1.0) > 1e-9) {
    throw std::invalid_argument("rodrigues_rotate: axis must be unit length");
  }
  const double c = std::cos(omega);
  const double s = std::sin(omega);
  const Vec3 cross{axis.y * q.z - axis.z * q.y, axis.z * q.x - axis.x * q.z,
                   axis.x * q.y - axis.y * q.x};
  const double dot = axis.x * q.x + axis.y * q.y + axis.z * q.z;
  return {q.x * c + cross.x * s + axis.x * dot * (1.0 - c),
          q.y * c + cross.y * s + axis.y * dot * (1.0 - c),
          q.z * c + cross.z * s + axis.z * dot * (1.0 - c)};
}

RotationMatrix rotation_matrix(const SphericalPoint& viewpoint) {
  const Vec3 z_axis{0.0, 0.0, 1.0};
  const Vec3 rotated_y = rodrigues_rotate(Vec3{0.0, 1.0, 0.0}, z_axis, viewpoint.theta);
  RotationMatrix r;
  const Vec3 basis[3] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  for (int col = 0; col < 3; ++col) {
    const Vec3 about_z = rodrigues_rotate(basis[col], z_axis, viewpoint.theta);
    const Vec3 out = rodrigues_rotate(about_z, rotated_y, -viewpoint.phi);
    r(0, col) = out.x;
    r(1, col) = out.y;
    r(2, col) = out.z;
  }
  return r;
}

std::pair<double, double> sph_to_erp(const SphericalPoint& p, int height, int width) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("sph_to_erp: dimensions must be >= 1");
  }
  const double m = (0.5 - p.phi / kPi) * static_cast<double>(height) - 0.5;
  const double n = (p.theta / (2.0 * kPi) + 0.5) * static_cast<double>(width) - 0.5;
  return {m, n};
}

std::array<double, 3> bilinear_sample(const ErpFrame& frame, double m, double n) {
  if (!std::isfinite(m) || !std::isfinite(n)) {
    throw std::invalid_argument("bilinear_sample: coordinates must be finite");
  }
  const int h = frame.height;
  const int w = frame.width;
  const double mf = std::floor(m);
  const double nf = std::floor(n);
  const double fm = m - mf;
  const double fn = n - nf;

  auto clamp_row = [h](long long i) {
    if (i < 0) return 0;
    if (i >= h) return h - 1;
    return static_cast<int>(i);
  };
  auto wrap_col = [w](long long j) {
    long long r = j % w;
    if (r < 0) r += w;
    return static_cast<int>(r);
  };

  const int r0 = clamp_row(static_cast<long long>(mf));
  const int r1 = clamp_row(static_cast<long long>(mf) + 1);
  const int c0 = wrap_col(static_cast<long long>(nf));
  const int c1 = wrap_col(static_cast<long long>(nf) + 1);

  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int c = 0; c < frame.channels; ++c) {
    const double top = (1.0 - fn) * frame.at(r0, c0, c) + fn * frame.at(r0, c1, c);
    const double bot = (1.0 - fn) * frame.at(r1, c0, c) + fn * frame.at(r1, c1, c);
    out[static_cast<std::size_t>(c)] = (1.0 - fm) * top + fm * bot;
  }
  return out;
}

ErpFrame extract_viewport(const ErpFrame& frame, const SphericalPoint& viewpoint,
                          const ViewportSpec& spec) {
  ErpFrame out(spec.height_px, spec.width_px, frame.channels);
  const RotationMatrix rot = rotation_matrix(viewpoint);
  const double r = spec.radius;
  for (int v = 0; v < spec.height_px; ++v) {
    for (int u = 0; u < spec.width_px; ++u) {
      const Vec3 q{r, static_cast<double>(u) - 0.5 * spec.width_px + 0.5,
                   0.5 * spec.height_px - static_cast<double>(v) - 0.5};
      const Vec3 qr = rot.apply(q);
      const SphericalPoint dir = vec3_to_sph(qr);
      const auto [m, n] = sph_to_erp(dir, frame.height, frame.width);
      const auto value = bilinear_sample(frame, m, n);
      for (int c = 0; c < frame.channels; ++c) {
        const double x = std::round(value[static_cast<std::size_t>(c)]);
        out.at(v, u, c) = static_cast<std::uint8_t>(x < 0.0 ? 0.0 : (x > 255.0 ? 255.0 : x));
      }
    }
  }
  return out;
}

UvPoint project_to_uv(const SphericalPoint& point, const SphericalPoint& anchor,
                      const ViewportSpec& spec) {
  const Vec3 p = sph_to_vec3(point, spec.radius);
  const RotationMatrix rot = rotation_matrix(anchor);
  const Vec3 q = rot.apply_transposed(p);
  const double x_min = 1e-6 * spec.radius;
  if (q.x <= x_min) {
    throw BehindViewportError("project_to_uv: point at or behind the viewport plane");
  }
  const double scale = spec.radius / q.x;
  return {q.y * scale, -q.z * scale};
}

SphericalPoint uv_to_sph(const UvPoint& p, const SphericalPoint& anchor,
                         const ViewportSpec& spec) {
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
    throw std::invalid_argument("uv_to_sph: coordinates must be finite");
  }
  const Vec3 plane{spec.radius, p.u, -p.v};
  const RotationMatrix rot = rotation_matrix(anchor);
  return vec3_to_sph(rot.apply(plane));
}

}  // namespace scanpath
