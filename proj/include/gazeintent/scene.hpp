#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazeintent/geometry.hpp"

namespace gazeintent {

enum class View { Human, Robot };
std::string_view to_string(View view) noexcept;

/// What a referential slot points at: an object, or a place on a surface.
enum class TargetProperty { Object, Position };
std::string_view to_string(TargetProperty p) noexcept;
std::optional<TargetProperty> target_property_from(std::string_view text) noexcept;

/// Category used when the command names no specific object ("this", "that").
inline constexpr std::string_view kGenericCategory = "stuff";
/// Category used for a bare location ("there", "here").
inline constexpr std::string_view kPositionCategory = "position";

/// [x_min, y_min, x_max, y_max] in pixels; membership is edge-inclusive.
struct BBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }
  bool contains(const Point2& p) const noexcept {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
  Point2 midpoint() const { return Point2((x_min + x_max) / 2, (y_min + y_max) / 2); }
  double area() const noexcept { return (x_max - x_min) * (y_max - y_min); }
  bool within(int width, int height) const noexcept {
    return x_min >= 0 && y_min >= 0 && x_max <= width && y_max <= height;
  }
  bool operator==(const BBox&) const = default;
};

/// Binary segmentation mask at view resolution, row-major.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, std::vector<std::uint8_t> bits);

  /// COCO uncompressed RLE: run lengths alternating 0/1 starting with 0,
  /// in column-major order.
  static Mask from_rle(int width, int height, const std::vector<long>& counts);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const noexcept;
  /// Pixel containing p (floor); false outside the image.
  bool contains(const Point2& p) const noexcept;
  std::size_t area() const noexcept;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

class ObjectObservation {
 public:
  ObjectObservation(std::string id, const BBox& bbox, std::optional<Mask> mask = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  /// Always the bbox midpoint.
  const Point2& position() const noexcept { return position_; }
  const BBox& bbox() const noexcept { return bbox_; }
  const std::optional<Mask>& mask() const noexcept { return mask_; }

 private:
  std::string id_;
  BBox bbox_;
  Point2 position_;
  std::optional<Mask> mask_;
};

enum class AnnotationKind { Object, Region };

/// Ground-truth annotation standing in for a detector output.
struct AnnotatedObject {
  std::string id;
  std::string category;
  AnnotationKind kind = AnnotationKind::Object;
  BBox bbox;
  std::optional<Mask> mask;
  std::optional<Point2> anchor_px;   // where a user is told to look; defaults to the midpoint
  std::optional<Point3> position_m;  // metric position, metrics only
};

struct AnnotatedScene {
  View view = View::Human;
  Intrinsics intrinsics;
  std::vector<AnnotatedObject> objects;

  const AnnotatedObject* find(std::string_view id) const noexcept;
};

struct SceneObservationSet {
  View view = View::Human;
  std::string category;
  std::vector<ObjectObservation> objects;
  Intrinsics intrinsics;

  bool empty() const noexcept { return objects.empty(); }
  const ObjectObservation* find(std::string_view id) const noexcept;
};

struct ReferredObject {
  View view = View::Human;
  ObjectObservation observation;
};

struct TargetQuery {
  TargetProperty property = TargetProperty::Object;
  std::string category;
};

/// Settings a real open-vocabulary detector adapter would take; the
/// ground-truth path ignores them.
struct DetectorConfig {
  double box_threshold = 0.3;
  double text_threshold = 0.3;
  std::string grounding_model = "tiny";
  std::string segmentation_model = "large";
};

/// Object slots see Object annotations of the category ("stuff" = all of
/// them); Position slots see Region annotations ("position" = all regions).
/// Category match is exact after normalization. Throws NoObjectsDetected on
/// an empty result and InvalidObservation on out-of-image boxes or duplicate ids.
SceneObservationSet observe(const AnnotatedScene& scene, const TargetQuery& query, View view);

/// Object-slot shorthand.
SceneObservationSet observe(const AnnotatedScene& scene, std::string_view category, View view);

}  // namespace gazeintent
