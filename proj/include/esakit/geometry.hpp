#pragma once

// Object-level geometric transforms that produce the appearance reference and
// target mask: in-plane translation of masks, mesh rotation rendered through
// an orthographic depth-buffered rasterizer, and uniform scaling.

#include <array>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "esakit/raster.hpp"

namespace esakit {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Linear color, channels in [0, 1].
struct Color {
  double r = 0.5;
  double g = 0.5;
  double b = 0.5;
};

using Face = std::array<std::size_t, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Triangle soup with optional per-vertex colors (empty = uniform mid gray).
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Color> colors;
  std::vector<Face> faces;

  /// Throws DomainError on bad indices, missing faces or a color count that
  /// does not match the vertex count.
  void validate() const;
};

Mat3 multiply(const Mat3& a, const Mat3& b);

/// Euler angles in degrees, applied about the mesh centroid in Z-Y-X order:
/// R = Rz(yaw) * Ry(pitch) * Rx(roll). The viewer looks along the z axis, so
/// yaw turns the object in the image plane.
class Rotation {
 public:
  Rotation() = default;
  Rotation(double yaw, double pitch, double roll);

  static Rotation from_matrix(const Mat3& m);

  double yaw() const noexcept { return yaw_; }
  double pitch() const noexcept { return pitch_; }
  double roll() const noexcept { return roll_; }
  Mat3 matrix() const;
  bool is_identity() const noexcept { return yaw_ == 0.0 && pitch_ == 0.0 && roll_ == 0.0; }

 private:
  double yaw_ = 0.0;
  double pitch_ = 0.0;
  double roll_ = 0.0;
};

/// Maps an angle in degrees to (-180, 180].
double normalize_degrees(double angle);

inline constexpr double kSafetyFactor = 0.7;
inline constexpr int kCanvasMultiple = 3;
inline constexpr int kMinTargetResolution = 8;

enum class RenderStyle {
  kAppearance,  // interpolated vertex colors on white
  kSilhouette,  // white on black
};

/// Output of the rasterizer on the (3T x 3T) canvas. The raster's mask is the
/// coverage buffer: exactly the pixels any triangle wrote.
struct Canvas {
  Raster image;
  std::vector<double> depth;  // +inf where uncovered
};

/// Rotates about the centroid, fits the bounding sphere to 2T of the 3T
/// canvas and rasterizes with a less-than depth test (smaller z is nearer)
/// and a top-left fill rule.
Canvas render_canvas(const Mesh& mesh, const Mat3& rotation, int target_resolution,
                     RenderStyle style);

/// Rescaled dimension for the 0.7 safety factor: nearest integer with the
/// parity of T, so the object centers exactly on the T x T canvas.
int fitted_extent(double extent, int target_resolution);

/// Crops `image` and `mask` to `box`, rescales uniformly so the longer side is
/// 0.7 T and centers the result on a white T x T canvas.
Raster fit_to_target(const Raster& image, const Raster& mask, const BBox& box,
                     int target_resolution);

/// Full rotation pipeline; the mask comes from a separate silhouette pass
/// thresholded at 128. Throws DegenerateRenderError if nothing is covered.
Raster render_rotated(const Mesh& mesh, const Rotation& rotation, int target_resolution);
Raster render_rotated(const Mesh& mesh, const Mat3& rotation, int target_resolution);

struct Offset {
  int dx = 0;
  int dy = 0;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Moves every masked pixel (with its color) by the offset onto a white
/// canvas of the same size. Pixels leaving the frame are dropped.
Raster translate_mask(const Raster& raster, Offset offset);

/// Uniform scale about the mask's bounding-box center; canvas size unchanged.
Raster scale_object(const Raster& raster, double s);

/// Composites the masked object over `scene` with its bbox center moved to
/// `target_center`. The returned mask is the scene mask united with the
/// placed object mask.
Raster place_at(const Raster& object, const Raster& scene, Point2 target_center);

enum class TransformKind { kTranslate, kRotate, kScale, kComposite };

struct TransformSpec {
  TransformKind kind = TransformKind::kComposite;
  Offset offset;
  Rotation rotation;
  double scale = 1.0;
  int target_resolution = 512;
  std::optional<Point2> target_center;  // defaults to the scene center

  void validate() const;
};

struct TransformResult {
  Raster reference;    // transformed object on white, T x T
  Raster target_mask;  // scene-sized; only the mask is meaningful
};

using TransformInput = std::variant<Mesh, Raster>;

/// Composite applies rotate, then scale, then translate.
///
/// Mesh input: the rendered object is the reference and is placed at
/// target_center + offset in the scene to form the target mask.
/// Raster input (object image + mask in scene coordinates): scale and
/// translate act in scene coordinates; the reference is the transformed
/// object fitted to T x T. Rotation needs a mesh.
TransformResult apply_transform(const TransformInput& input, const TransformSpec& spec,
                                const Raster& scene);

}  // namespace esakit
