#pragma once

#include <filesystem>
#include <string>

#include "gazeintent/error.hpp"
#include "gazeintent/geometry.hpp"
#include "gazeintent/rng.hpp"
#include "gazeintent/streams.hpp"
#include "oracles.hpp"

namespace testing {

using gazeintent::ErrorCode;

#define CHECK_CODE(expr, expected_code)                  \
  do {                                                   \
    bool thrown_ = false;                                \
    try {                                                \
      (void)(expr);                                      \
    } catch (const gazeintent::Error& e_) {              \
      thrown_ = true;                                    \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what()); \
    }                                                    \
    CHECK_MESSAGE(thrown_, "no gazeintent::Error thrown"); \
  } while (0)

inline std::filesystem::path source_dir() { return GAZEINTENT_SOURCE_DIR; }
inline std::filesystem::path scenario_path(const std::string& rel) { return source_dir() / "scenarios" / rel; }

struct RawPose {
  oracle::Mat3 r;
  oracle::Vec3 t;
};

inline RawPose random_raw_pose(gazeintent::Rng& rng, double max_t = 2.0) {
  oracle::Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
  const double angle = rng.uniform(-3.14159, 3.14159);
  return {oracle::rotation(axis, angle),
          {rng.uniform(-max_t, max_t), rng.uniform(-max_t, max_t), rng.uniform(-max_t, max_t)}};
}

inline gazeintent::Pose to_pose(const RawPose& raw, gazeintent::FrameId from, gazeintent::FrameId to) {
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = raw.r[i][j];
  return gazeintent::Pose::ingest(from, to, r, Eigen::Vector3d(raw.t[0], raw.t[1], raw.t[2]));
}

// Words 0.3 s long with 0.15 s gaps starting at 0.5 s.
inline gazeintent::Transcript timed(const std::string& text) {
  std::vector<gazeintent::WordTiming> words;
  double t = 0.5;
  for (const auto& w : gazeintent::tokenize(text)) {
    words.push_back({w, t, t + 0.3});
    t += 0.45;
  }
  return gazeintent::Transcript(std::move(words), text);
}

inline oracle::Mat4 to_mat4(const RawPose& raw) { return oracle::rigid(raw.r, raw.t); }

}  // namespace testing
