#include <doctest.h>

#include "gazeintent/streams.hpp"
#include "support.hpp"

using namespace gazeintent;

namespace {

std::vector<GazeRecord> stream_at(const std::vector<double>& times) {
  std::vector<GazeRecord> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    GazeRecord r;
    r.t = times[i];
    r.gaze_pupil = Point3(static_cast<double>(i), 0, 1);
    out.push_back(r);
  }
  return out;
}

Transcript sample_transcript() {
  return Transcript::from_words({{"Put", 0.0, 0.2},
                                 {"this", 0.3, 0.5},
                                 {"on", 0.6, 0.7},
                                 {"this,", 0.8, 1.0},
                                 {"please.", 1.1, 1.4}});
}

}  // namespace

TEST_SUITE("streams") {

TEST_CASE("normalize and tokenize") {
  CHECK(normalize_text("  Put the CUP, there!  ") == "put the cup there");
  CHECK(normalize_text("lift 2.5 cm.") == "lift 2.5 cm");
  CHECK(normalize_text("end.") == "end");
  CHECK(tokenize("Grab  this\tnow") == std::vector<std::string>{"grab", "this", "now"});
  CHECK(tokenize("").empty());
}

TEST_CASE("transcript validation") {
  CHECK_NOTHROW(sample_transcript());
  CHECK_CODE(Transcript::from_words({{"a", 0.0, 0.5}, {"b", 0.4, 0.6}}), ErrorCode::InvalidTranscript);
  CHECK_CODE(Transcript::from_words({{"a", 0.5, 0.4}}), ErrorCode::InvalidTranscript);
  CHECK_CODE(Transcript({{"put", 0, 0.1}}, "pick"), ErrorCode::InvalidTranscript);
  CHECK_CODE(Transcript::from_words({{"two words", 0, 0.1}}), ErrorCode::InvalidTranscript);
  CHECK_NOTHROW(Transcript({{"Put", 0, 0.1}, {"it", 0.1, 0.2}}, "put it."));
  const auto t = sample_transcript();
  CHECK(t.span() == TimeInterval{0.0, 1.4});
  CHECK(t.tokens()[3] == "this");
}

TEST_CASE("word lookup by occurrence") {
  const auto t = sample_transcript();
  CHECK(find_word(t, "this") == 1u);
  CHECK(find_word(t, "this", 1) == 3u);
  CHECK_FALSE(find_word(t, "this", 2).has_value());
  CHECK(word_interval(t, "THIS", 1) == TimeInterval{0.8, 1.0});
  const auto padded = word_interval(t, "put", 0, 0.25, TimeInterval{0.0, 1.4});
  CHECK(padded.start == 0.0);
  CHECK(padded.end == doctest::Approx(0.45));
  CHECK_CODE(word_interval(t, "cup"), ErrorCode::WordNotFound);
  CHECK_CODE(word_interval(t, "this", 5), ErrorCode::WordNotFound);
}

TEST_CASE("common interval") {
  HumanInput in;
  in.transcript = sample_transcript();
  in.gaze_stream = stream_at({0.1, 0.2, 1.2});
  in.frames = {{0.05, "a"}, {1.3, "b"}};
  CHECK(in.common_interval() == TimeInterval{0.1, 1.2});
}

TEST_CASE("index bound") {
  CHECK(gaze_index_bound(0.5) == 9);
  CHECK(gaze_index_bound(0.15) == 2);
  CHECK(gaze_index_bound(0.05) == 0);
  CHECK(gaze_index_bound(0.04) == -1);
  CHECK(gaze_index_bound(1.0, 10) == 9);
}

TEST_CASE("window sample counts") {
  std::vector<double> times;
  for (int i = 0; i <= 200; ++i) times.push_back(i * 0.01);
  const auto stream = stream_at(times);
  CHECK(gaze_window(stream, {0.2, 0.7}).size() == 10);
  CHECK(gaze_window(stream, {0.2, 0.35}).size() == 3);
  CHECK_CODE(gaze_window(stream, {0.2, 0.21}), ErrorCode::DegenerateInterval);
  CHECK_CODE(gaze_window(stream, {0.7, 0.2}), ErrorCode::DegenerateInterval);
  CHECK_CODE(gaze_window(stream, {5.0, 6.0}), ErrorCode::EmptyWindow);
  CHECK_CODE(gaze_window(std::vector<GazeRecord>{}, {0.0, 1.0}), ErrorCode::EmptyWindow);
}

TEST_CASE("window picks the nearest record per tick") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> times;
    double t = rng.uniform(0, 0.2);
    const int n = 5 + static_cast<int>(rng.uniform() * 60);
    for (int i = 0; i < n; ++i) {
      times.push_back(t);
      // a regular 0.5-tick grid now and then, so ticks fall midway between records
      t += trial % 7 == 0 ? 0.025 : rng.uniform(0.001, 0.12);
    }
    const auto stream = stream_at(times);
    const double a = rng.uniform(times.front(), times.back());
    const double b = std::min(times.back() + 0.3, a + rng.uniform(0.05, 1.5));
    const double rate = trial % 2 ? 20.0 : 10.0;
    std::vector<GazeRecord> got;
    try {
      got = gaze_window(stream, {a, b}, rate);
    } catch (const Error& e) {
      const bool any_inside = std::any_of(times.begin(), times.end(), [&](double x) { return x >= a && x <= b; });
      if (e.code() == ErrorCode::EmptyWindow) CHECK_FALSE(any_inside);
      else CHECK(std::floor((b - a) * rate - 1 + 1e-9) < 0);
      continue;
    }
    REQUIRE(static_cast<long>(got.size()) == static_cast<long>(std::floor((b - a) * rate - 1 + 1e-9)) + 1);
    for (std::size_t k = 0; k < got.size(); ++k) {
      const double tick = a + static_cast<double>(k) / rate;
      const std::size_t want = oracle::nearest(times, tick);
      CHECK(got[k].t == times[want]);
      CHECK(got[k].gaze_pupil.x() == static_cast<double>(want));
    }
  }
}

}  // TEST_SUITE
