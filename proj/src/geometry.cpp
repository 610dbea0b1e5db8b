#include "esakit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "esakit/errors.hpp"

namespace esakit {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct ScreenVertex {
  double x;
  double y;
  double z;
  Color color;
};

double orient2d(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// For positively oriented triangles a shared edge is walked in opposite
// directions by its two triangles, so exactly one of them owns it.
bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

Vec3 apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

std::uint8_t channel(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void rasterize(const ScreenVertex& v0, ScreenVertex v1, ScreenVertex v2, RenderStyle style,
               Canvas& canvas) {
  double area = orient2d(v0.x, v0.y, v1.x, v1.y, v2.x, v2.y);
  if (area == 0.0 || !std::isfinite(area)) return;
  if (area < 0.0) {
    std::swap(v1, v2);
    area = -area;
  }
  Raster& img = canvas.image;
  const int xmin = std::max(0, static_cast<int>(std::floor(std::min({v0.x, v1.x, v2.x}))));
  const int ymin = std::max(0, static_cast<int>(std::floor(std::min({v0.y, v1.y, v2.y}))));
  const int xmax =
      std::min(img.width() - 1, static_cast<int>(std::ceil(std::max({v0.x, v1.x, v2.x}))));
  const int ymax =
      std::min(img.height() - 1, static_cast<int>(std::ceil(std::max({v0.y, v1.y, v2.y}))));
  const bool own0 = owns_edge(v1, v2);
  const bool own1 = owns_edge(v2, v0);
  const bool own2 = owns_edge(v0, v1);

  for (int y = ymin; y <= ymax; ++y) {
    const double py = y + 0.5;
    for (int x = xmin; x <= xmax; ++x) {
      const double px = x + 0.5;
      const double w0 = orient2d(v1.x, v1.y, v2.x, v2.y, px, py);
      const double w1 = orient2d(v2.x, v2.y, v0.x, v0.y, px, py);
      const double w2 = orient2d(v0.x, v0.y, v1.x, v1.y, px, py);
      const bool inside = (w0 > 0.0 || (w0 == 0.0 && own0)) &&
                          (w1 > 0.0 || (w1 == 0.0 && own1)) &&
                          (w2 > 0.0 || (w2 == 0.0 && own2));
      if (!inside) continue;
      const double l0 = w0 / area, l1 = w1 / area, l2 = w2 / area;
      const double z = l0 * v0.z + l1 * v1.z + l2 * v2.z;
      const auto idx = static_cast<std::size_t>(y) * img.width() + x;
      if (!(z < canvas.depth[idx])) continue;
      canvas.depth[idx] = z;
      if (style == RenderStyle::kSilhouette) {
        img.set_pixel(x, y, kWhite);
      } else {
        img.set_pixel(x, y,
                      Rgb{channel(l0 * v0.color.r + l1 * v1.color.r + l2 * v2.color.r),
                          channel(l0 * v0.color.g + l1 * v1.color.g + l2 * v2.color.g),
                          channel(l0 * v0.color.b + l1 * v1.color.b + l2 * v2.color.b)});
      }
      img.set_mask(x, y, true);
    }
  }
}

void check_resolution(int t) {
  if (t < kMinTargetResolution) {
    throw DomainError("target resolution must be at least " +
                      std::to_string(kMinTargetResolution) + ", got " + std::to_string(t));
  }
}

}  // namespace

void Mesh::validate() const {
  if (faces.empty()) throw DomainError("mesh has no faces");
  if (!colors.empty() && colors.size() != vertices.size()) {
    throw DomainError("mesh has " + std::to_string(colors.size()) + " colors for " +
                      std::to_string(vertices.size()) + " vertices");
  }
  for (const auto& f : faces) {
    for (auto i : f) {
      if (i >= vertices.size()) {
        throw DomainError("face index " + std::to_string(i) + " out of range");
      }
    }
  }
  for (const auto& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw DomainError("mesh vertex is not finite");
    }
  }
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) m[i][j] += a[i][k] * b[k][j];
    }
  }
  return m;
}

double normalize_degrees(double angle) {
  if (!std::isfinite(angle)) throw DomainError("rotation angles must be finite");
  double a = std::fmod(angle, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

Rotation::Rotation(double yaw, double pitch, double roll)
    : yaw_(normalize_degrees(yaw)), pitch_(normalize_degrees(pitch)),
      roll_(normalize_degrees(roll)) {}

Mat3 Rotation::matrix() const {
  const double cy = std::cos(yaw_ * kDegToRad), sy = std::sin(yaw_ * kDegToRad);
  const double cp = std::cos(pitch_ * kDegToRad), sp = std::sin(pitch_ * kDegToRad);
  const double cr = std::cos(roll_ * kDegToRad), sr = std::sin(roll_ * kDegToRad);
  const Mat3 rz{{{cy, -sy, 0}, {sy, cy, 0}, {0, 0, 1}}};
  const Mat3 ry{{{cp, 0, sp}, {0, 1, 0}, {-sp, 0, cp}}};
  const Mat3 rx{{{1, 0, 0}, {0, cr, -sr}, {0, sr, cr}}};
  return multiply(rz, multiply(ry, rx));
}

Rotation Rotation::from_matrix(const Mat3& m) {
  const double pitch = std::asin(std::clamp(-m[2][0], -1.0, 1.0));
  double yaw = 0.0;
  double roll = 0.0;
  if (std::abs(m[2][0]) < 1.0 - 1e-12) {
    yaw = std::atan2(m[1][0], m[0][0]);
    roll = std::atan2(m[2][1], m[2][2]);
  } else {
    // Gimbal lock: fold everything into yaw.
    yaw = std::atan2(-m[0][1], m[1][1]);
  }
  return Rotation(yaw / kDegToRad, pitch / kDegToRad, roll / kDegToRad);
}

Canvas render_canvas(const Mesh& mesh, const Mat3& rotation, int target_resolution,
                     RenderStyle style) {
  mesh.validate();
  check_resolution(target_resolution);
  const int size = kCanvasMultiple * target_resolution;
  Canvas canvas{Raster(size, size, style == RenderStyle::kSilhouette ? kBlack : kWhite),
                std::vector<double>(static_cast<std::size_t>(size) * size,
                                    std::numeric_limits<double>::infinity())};

  Vec3 centroid;
  for (const auto& v : mesh.vertices) {
    centroid.x += v.x;
    centroid.y += v.y;
    centroid.z += v.z;
  }
  const double n = static_cast<double>(mesh.vertices.size());
  centroid = {centroid.x / n, centroid.y / n, centroid.z / n};
  double radius = 0.0;
  for (const auto& v : mesh.vertices) {
    radius = std::max(radius, std::hypot(v.x - centroid.x, v.y - centroid.y, v.z - centroid.z));
  }
  if (radius == 0.0) throw DegenerateRenderError("mesh collapses to a single point");

  // Bounding sphere diameter maps to 2T pixels; model y points up.
  const double scale = target_resolution / radius;
  const double center = 0.5 * size;
  std::vector<ScreenVertex> screen;
  screen.reserve(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    const Vec3 r = apply(rotation, {v.x - centroid.x, v.y - centroid.y, v.z - centroid.z});
    screen.push_back({center + scale * r.x, center - scale * r.y, r.z,
                      mesh.colors.empty() ? Color{} : mesh.colors[i]});
  }
  for (const auto& f : mesh.faces) {
    rasterize(screen[f[0]], screen[f[1]], screen[f[2]], style, canvas);
  }
  return canvas;
}

int fitted_extent(double extent, int target_resolution) {
  const int parity = target_resolution % 2;
  const int n = static_cast<int>(std::round((extent - parity) / 2.0)) * 2 + parity;
  return std::max(n, parity == 0 ? 2 : 1);
}

Raster fit_to_target(const Raster& image, const Raster& mask, const BBox& box,
                     int target_resolution) {
  check_resolution(target_resolution);
  const double s = kSafetyFactor * target_resolution / std::max(box.width(), box.height());
  const int w = fitted_extent(box.width() * s, target_resolution);
  const int h = fitted_extent(box.height() * s, target_resolution);

  Raster scaled = resize(crop(image, box), w, h);
  const Raster scaled_mask = resize(crop(mask, box), w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) scaled.set_mask(x, y, scaled_mask.mask(x, y));
  }
  Raster out(target_resolution, target_resolution, kWhite);
  blit(scaled, out, (target_resolution - w) / 2, (target_resolution - h) / 2);
  return out;
}

Raster render_rotated(const Mesh& mesh, const Rotation& rotation, int target_resolution) {
  return render_rotated(mesh, rotation.matrix(), target_resolution);
}

Raster render_rotated(const Mesh& mesh, const Mat3& rotation, int target_resolution) {
  const Canvas appearance =
      render_canvas(mesh, rotation, target_resolution, RenderStyle::kAppearance);
  const auto box = mask_bbox(appearance.image);
  if (!box) throw DegenerateRenderError("mesh projects to zero pixels");

  Canvas silhouette = render_canvas(mesh, rotation, target_resolution, RenderStyle::kSilhouette);
  Raster& sil = silhouette.image;
  for (int y = 0; y < sil.height(); ++y) {
    for (int x = 0; x < sil.width(); ++x) sil.set_mask(x, y, sil.pixel(x, y).r >= 128);
  }
  return fit_to_target(appearance.image, sil, *box, target_resolution);
}

Raster translate_mask(const Raster& raster, Offset offset) {
  Raster out(raster.width(), raster.height(), kWhite);
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      if (!raster.mask(x, y)) continue;
      const int tx = x + offset.dx;
      const int ty = y + offset.dy;
      if (!out.contains(tx, ty)) continue;
      out.set_pixel(tx, ty, raster.pixel(x, y));
      out.set_mask(tx, ty, true);
    }
  }
  return out;
}

Raster scale_object(const Raster& raster, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("scale factor must be positive");
  const auto box = mask_bbox(raster);
  if (s == 1.0 || !box) return raster;
  const double cx = box->center_x();
  const double cy = box->center_y();
  const int w = raster.width();
  const int h = raster.height();
  Raster out(w, h, kWhite);
  auto src_coord = [s](double dst, double c) { return c + (dst - c) / s; };

  for (int y = 0; y < h; ++y) {
    const double uy = src_coord(y + 0.5, cy);
    const double my_lo = src_coord(y, cy);
    const double my_hi = src_coord(y + 1.0, cy);
    for (int x = 0; x < w; ++x) {
      const double ux = src_coord(x + 0.5, cx);
      if (ux >= 0.0 && uy >= 0.0 && ux <= w && uy <= h) {
        const double sx = std::clamp(ux - 0.5, 0.0, w - 1.0);
        const double sy = std::clamp(uy - 0.5, 0.0, h - 1.0);
        const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double fx = sx - x0, fy = sy - y0;
        auto lerp = [&](std::uint8_t Rgb::*ch) {
          const double top = (1 - fx) * (raster.pixel(x0, y0).*ch) + fx * (raster.pixel(x1, y0).*ch);
          const double bot = (1 - fx) * (raster.pixel(x0, y1).*ch) + fx * (raster.pixel(x1, y1).*ch);
          return static_cast<std::uint8_t>(std::lround((1 - fy) * top + fy * bot));
        };
        out.set_pixel(x, y, Rgb{lerp(&Rgb::r), lerp(&Rgb::g), lerp(&Rgb::b)});
      }

      bool on = false;
      if (s >= 1.0) {
        const int mx = static_cast<int>(std::floor(ux));
        const int my = static_cast<int>(std::floor(uy));
        on = raster.contains(mx, my) && raster.mask(mx, my);
      } else {
        const int x_lo = std::max(0, static_cast<int>(std::floor(src_coord(x, cx))));
        const int x_hi = std::min(w, static_cast<int>(std::ceil(src_coord(x + 1.0, cx))));
        const int y_lo = std::max(0, static_cast<int>(std::floor(my_lo)));
        const int y_hi = std::min(h, static_cast<int>(std::ceil(my_hi)));
        for (int v = y_lo; v < y_hi && !on; ++v) {
          for (int u = x_lo; u < x_hi && !on; ++u) on = raster.mask(u, v);
        }
      }
      out.set_mask(x, y, on);
    }
  }
  return out;
}

Raster place_at(const Raster& object, const Raster& scene, Point2 target_center) {
  if (!(target_center.x >= 0.0 && target_center.y >= 0.0 && target_center.x < scene.width() &&
        target_center.y < scene.height())) {
    throw DomainError("target center lies outside the scene");
  }
  Raster out = scene;
  const auto box = mask_bbox(object);
  if (!box) return out;
  const int dx = static_cast<int>(std::floor(target_center.x - box->center_x() + 0.5));
  const int dy = static_cast<int>(std::floor(target_center.y - box->center_y() + 0.5));
  for (int y = box->y0; y < box->y1; ++y) {
    for (int x = box->x0; x < box->x1; ++x) {
      if (!object.mask(x, y) || !out.contains(x + dx, y + dy)) continue;
      out.set_pixel(x + dx, y + dy, object.pixel(x, y));
      out.set_mask(x + dx, y + dy, true);
    }
  }
  return out;
}

void TransformSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");
  check_resolution(target_resolution);
}

TransformResult apply_transform(const TransformInput& input, const TransformSpec& spec,
                                const Raster& scene) {
  spec.validate();
  const bool rotate =
      spec.kind == TransformKind::kRotate || spec.kind == TransformKind::kComposite;
  const bool scale =
      spec.kind == TransformKind::kScale || spec.kind == TransformKind::kComposite;
  const bool translate =
      spec.kind == TransformKind::kTranslate || spec.kind == TransformKind::kComposite;
  const int t = spec.target_resolution;

  if (const auto* mesh = std::get_if<Mesh>(&input)) {
    Raster reference = render_rotated(*mesh, rotate ? spec.rotation : Rotation(), t);
    if (scale) reference = scale_object(reference, spec.scale);
    Point2 center = spec.target_center.value_or(Point2{scene.width() / 2.0, scene.height() / 2.0});
    if (translate) {
      center.x += spec.offset.dx;
      center.y += spec.offset.dy;
    }
    Raster blank(scene.width(), scene.height(), kBlack);
    Raster target = place_at(reference, blank, center);
    return {std::move(reference), std::move(target)};
  }

  const auto& source = std::get<Raster>(input);
  if (source.width() != scene.width() || source.height() != scene.height()) {
    throw ShapeError("source raster and scene differ in size");
  }
  if (rotate && !spec.rotation.is_identity()) {
    throw DomainError("rotation requires a mesh input");
  }
  Raster moved = source;
  if (scale) moved = scale_object(moved, spec.scale);
  if (translate) moved = translate_mask(moved, spec.offset);
  for (int y = 0; y < moved.height(); ++y) {
    for (int x = 0; x < moved.width(); ++x) {
      if (!moved.mask(x, y)) moved.set_pixel(x, y, kWhite);
    }
  }
  const auto box = mask_bbox(moved);
  if (!box) throw DegenerateRenderError("transformed object left the scene");
  Raster reference = fit_to_target(moved, moved, *box, t);
  Raster target(scene.width(), scene.height(), kBlack);
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) target.set_mask(x, y, moved.mask(x, y));
  }
  return {std::move(reference), std::move(target)};
}

}  // namespace esakit
