#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazeintent/geometry.hpp"

namespace gazeintent {

struct TimeInterval {
  double start = 0;  // seconds
  double end = 0;

  double duration() const noexcept { return end - start; }
  bool contains(const TimeInterval& inner) const noexcept {
    return inner.start >= start && inner.end <= end;
  }
  bool operator==(const TimeInterval&) const = default;
};

/// Lowercase, drop punctuation (a '.' between digits survives), collapse whitespace.
std::string normalize_text(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

struct WordTiming {
  std::string text;
  double t_start = 0;
  double t_end = 0;
};

/// Word-timestamped ASR output.
class Transcript {
 public:
  Transcript() = default;

  /// Throws InvalidTranscript if words overlap, run backwards, or do not
  /// spell out raw_text after normalization.
  Transcript(std::vector<WordTiming> words, std::string raw_text);

  /// raw_text is the whitespace join of the words.
  static Transcript from_words(std::vector<WordTiming> words);

  const std::vector<WordTiming>& words() const noexcept { return words_; }
  const std::string& raw_text() const noexcept { return raw_text_; }
  bool empty() const noexcept { return words_.empty(); }
  TimeInterval span() const;

  /// Normalized token of each word, index-aligned with words().
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<WordTiming> words_;
  std::string raw_text_;
  std::vector<std::string> tokens_;
};

/// One eye-tracker sample with the head pose (world_T_gc) at the same instant.
struct GazeRecord {
  double t = 0;
  Point3 gaze_pupil = Point3::Zero();
  Pose head_pose = Pose::identity(FrameId::fixed(FrameName::GlassesCamera));
};

struct FrameRef {
  double t = 0;
  std::string frame_id;
};

/// Human-view input state: speech, glasses images (by reference) and gaze.
struct HumanInput {
  Transcript transcript;
  std::vector<GazeRecord> gaze_stream;
  std::vector<FrameRef> frames;

  /// Interval covered by every non-empty stream.
  TimeInterval common_interval() const;
};

inline constexpr double kHeadPoseRateHz = 20.0;

/// Index bound N = floor(duration * rate - 1). Negative means no ticks fit.
long gaze_index_bound(double duration, double rate_hz = kHeadPoseRateHz);

/// One record per head-pose tick t_a + n / rate, n = 0..N, each the record
/// nearest in time (ties go to the earlier record). `stream` must be time-ordered.
/// Throws EmptyWindow if no record falls inside the interval and
/// DegenerateInterval if no tick fits.
std::vector<GazeRecord> gaze_window(std::span<const GazeRecord> stream, TimeInterval interval,
                                    double rate_hz = kHeadPoseRateHz);

/// Timing of the `occurrence`-th (0-based) match of `word`, widened by
/// `padding` seconds per side and clamped to `bounds` when given.
TimeInterval word_interval(const Transcript& transcript, std::string_view word,
                           std::size_t occurrence = 0, double padding = 0.0,
                           std::optional<TimeInterval> bounds = std::nullopt);

/// Index into transcript.words() of that occurrence, or nullopt.
std::optional<std::size_t> find_word(const Transcript& transcript, std::string_view word,
                                     std::size_t occurrence = 0);

}  // namespace gazeintent
