#include "gazeintent/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gazeintent/error.hpp"
#include "gazeintent/streams.hpp"

namespace gazeintent {

std::string_view to_string(View view) noexcept {
  return view == View::Human ? "human" : "robot";
}

std::string_view to_string(TargetProperty p) noexcept {
  return p == TargetProperty::Object ? "object" : "position";
}

std::optional<TargetProperty> target_property_from(std::string_view text) noexcept {
  const std::string norm = normalize_text(text);
  if (norm == "object") return TargetProperty::Object;
  if (norm == "position") return TargetProperty::Position;
  return std::nullopt;
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 0 || height < 0 ||
      bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidObservation, "mask size does not match its dimensions");
  }
}

Mask Mask::from_rle(int width, int height, const std::vector<long>& counts) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidObservation, "mask dimensions must be positive");
  const std::size_t total = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint8_t> bits(total, 0);
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (long run : counts) {
    if (run < 0 || pos + static_cast<std::size_t>(run) > total) {
      throw Error(ErrorCode::InvalidObservation, "RLE runs overflow the mask");
    }
    for (long k = 0; k < run; ++k, ++pos) {
      if (value) {
        const std::size_t col = pos / static_cast<std::size_t>(height);
        const std::size_t row = pos % static_cast<std::size_t>(height);
        bits[row * static_cast<std::size_t>(width) + col] = 1;
      }
    }
    value ^= 1;
  }
  if (pos != total) throw Error(ErrorCode::InvalidObservation, "RLE runs do not cover the mask");
  return Mask(width, height, std::move(bits));
}

bool Mask::at(int x, int y) const noexcept {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  return bits_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] != 0;
}

bool Mask::contains(const Point2& p) const noexcept {
  if (!std::isfinite(p.x()) || !std::isfinite(p.y())) return false;
  return at(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
}

std::size_t Mask::area() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

ObjectObservation::ObjectObservation(std::string id, const BBox& bbox, std::optional<Mask> mask)
    : id_(std::move(id)), bbox_(bbox), position_(bbox.midpoint()), mask_(std::move(mask)) {
  if (!bbox_.valid()) throw Error(ErrorCode::InvalidObservation, "bbox of '" + id_ + "' is inverted");
}

const AnnotatedObject* AnnotatedScene::find(std::string_view id) const noexcept {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const ObjectObservation* SceneObservationSet::find(std::string_view id) const noexcept {
  for (const auto& o : objects) {
    if (o.id() == id) return &o;
  }
  return nullptr;
}

SceneObservationSet observe(const AnnotatedScene& scene, const TargetQuery& query, View view) {
  if (scene.view != view) {
    throw Error(ErrorCode::InvalidObservation,
                "annotations are for the " + std::string(to_string(scene.view)) + " view");
  }
  const std::string category = normalize_text(query.category);
  const bool want_region = query.property == TargetProperty::Position;
  const bool wildcard = want_region ? category == kPositionCategory : category == kGenericCategory;

  SceneObservationSet out;
  out.view = view;
  out.category = category;
  out.intrinsics = scene.intrinsics;
  std::set<std::string> seen;
  for (const AnnotatedObject& a : scene.objects) {
    if ((a.kind == AnnotationKind::Region) != want_region) continue;
    if (!wildcard && normalize_text(a.category) != category) continue;
    if (!a.bbox.within(scene.intrinsics.width, scene.intrinsics.height)) {
      throw Error(ErrorCode::InvalidObservation, "bbox of '" + a.id + "' leaves the image");
    }
    if (!seen.insert(a.id).second) {
      throw Error(ErrorCode::InvalidObservation, "duplicate object id '" + a.id + "'");
    }
    out.objects.emplace_back(a.id, a.bbox, a.mask);
  }
  if (out.objects.empty()) {
    throw Error(ErrorCode::NoObjectsDetected, "no " + std::string(want_region ? "region" : "object") +
                                                  " of category '" + category + "' in the " +
                                                  std::string(to_string(view)) + " view");
  }
  return out;
}

SceneObservationSet observe(const AnnotatedScene& scene, std::string_view category, View view) {
  return observe(scene, TargetQuery{TargetProperty::Object, std::string(category)}, view);
}

}  // namespace gazeintent
