#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scanpath {

/// Thrown when a point is projected at or behind the viewport plane.
class BehindViewportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Viewpoint as (latitude, longitude) in radians; canonicalized on
/// construction to phi in [-pi/2, pi/2], theta in [-pi, pi).
struct SphericalPoint {
  double phi = 0.0;
  double theta = 0.0;

  SphericalPoint() = default;
  SphericalPoint(double phi_in, double theta_in);
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

/// Viewport-relative coordinates in pixels, origin at the viewport center.
/// u grows rightward, v grows downward (image convention).
struct UvPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Rectilinear viewport geometry. The sphere radius is derived from the
/// horizontal field of view: r = 0.5 * Wv * cot(0.5 * theta_v). The vertical
/// FoV is carried as metadata only.
struct ViewportSpec {
  int height_px = 0;
  int width_px = 0;
  double fov_v = 0.0;  // radians
  double fov_h = 0.0;  // radians
  double radius = 0.0;

  ViewportSpec() = default;
  ViewportSpec(int height, int width, double fov_v_rad, double fov_h_rad);
};

/// Row-major interleaved 8-bit raster; used both for ERP frames and for
/// extracted viewports.
struct ErpFrame {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;

  ErpFrame() = default;
  ErpFrame(int h, int w, int c);

  std::uint8_t at(int row, int col, int channel) const {
    return samples[static_cast<std::size_t>((row * width + col) * channels + channel)];
  }
  std::uint8_t& at(int row, int col, int channel) {
    return samples[static_cast<std::size_t>((row * width + col) * channels + channel)];
  }
};

/// 3x3 rotation matrix, row-major.
struct RotationMatrix {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int row, int col) const { return m[static_cast<std::size_t>(row * 3 + col)]; }
  double& operator()(int row, int col) { return m[static_cast<std::size_t>(row * 3 + col)]; }

  Vec3 apply(const Vec3& q) const;
  /// Applies the transpose (inverse for a rotation).
  Vec3 apply_transposed(const Vec3& q) const;
};

Vec3 sph_to_vec3(const SphericalPoint& p, double radius);
/// Direction of q as a spherical point (radius dropped).
SphericalPoint vec3_to_sph(const Vec3& q);

/// Rotates q about the unit axis k by omega radians (right-hand rule).
Vec3 rodrigues_rotate(const Vec3& q, const Vec3& axis, double omega);

/// Rotation taking the viewport frame at (0, 0) to the given viewpoint:
/// a rotation about z by theta composed with a rotation about the rotated
/// y axis by -phi. R(0,0) = I.
RotationMatrix rotation_matrix(const SphericalPoint& viewpoint);

/// Continuous ERP sampling position of a spherical point.
std::pair<double, double> sph_to_erp(const SphericalPoint& p, int height, int width);

/// Bilinear interpolation with latitude clamp and longitude wrap.
std::array<double, 3> bilinear_sample(const ErpFrame& frame, double m, double n);

/// Renders the rectilinear viewport tangent at the viewpoint.
ErpFrame extract_viewport(const ErpFrame& frame, const SphericalPoint& viewpoint,
                          const ViewportSpec& spec);

/// Projects a spherical point onto the viewport anchored at `anchor`.
/// Throws BehindViewportError when the point is at or behind the plane.
UvPoint project_to_uv(const SphericalPoint& point, const SphericalPoint& anchor,
                      const ViewportSpec& spec);

/// Inverse of project_to_uv on its domain.
SphericalPoint uv_to_sph(const UvPoint& p, const SphericalPoint& anchor,
                         const ViewportSpec& spec);

}  // namespace scanpath
