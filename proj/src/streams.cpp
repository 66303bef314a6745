#include "gazeintent/streams.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "gazeintent/error.hpp"

namespace gazeintent {

namespace {

// Absorbs representation error in duration * rate (e.g. 0.15 s * 20 Hz).
constexpr double kIndexEpsilon = 1e-9;

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    const bool decimal_point = c == '.' && i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) &&
                               is_digit(text[i + 1]);
    if (!std::isalnum(uc) && !decimal_point) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in(normalize_text(text));
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  return tokens;
}

Transcript::Transcript(std::vector<WordTiming> words, std::string raw_text)
    : words_(std::move(words)), raw_text_(std::move(raw_text)) {
  std::string joined;
  tokens_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const WordTiming& w = words_[i];
    if (!std::isfinite(w.t_start) || !std::isfinite(w.t_end) || w.t_start > w.t_end) {
      throw Error(ErrorCode::InvalidTranscript, "word '" + w.text + "' has an ill-ordered interval");
    }
    if (i > 0 && w.t_start < words_[i - 1].t_end) {
      throw Error(ErrorCode::InvalidTranscript, "word '" + w.text + "' overlaps its predecessor");
    }
    std::string tok = normalize_text(w.text);
    if (tok.find(' ') != std::string::npos) {
      throw Error(ErrorCode::InvalidTranscript, "word '" + w.text + "' holds more than one token");
    }
    if (!tok.empty()) {
      if (!joined.empty()) joined.push_back(' ');
      joined += tok;
    }
    tokens_.push_back(std::move(tok));
  }
  if (joined != normalize_text(raw_text_)) {
    throw Error(ErrorCode::InvalidTranscript,
                "words '" + joined + "' do not match text '" + raw_text_ + "'");
  }
}

Transcript Transcript::from_words(std::vector<WordTiming> words) {
  std::string raw;
  for (const WordTiming& w : words) {
    if (!raw.empty()) raw.push_back(' ');
    raw += w.text;
  }
  return Transcript(std::move(words), std::move(raw));
}

TimeInterval Transcript::span() const {
  if (words_.empty()) return {};
  return {words_.front().t_start, words_.back().t_end};
}

TimeInterval HumanInput::common_interval() const {
  double lo = -INFINITY;
  double hi = INFINITY;
  if (!transcript.empty()) {
    lo = std::max(lo, transcript.span().start);
    hi = std::min(hi, transcript.span().end);
  }
  if (!gaze_stream.empty()) {
    lo = std::max(lo, gaze_stream.front().t);
    hi = std::min(hi, gaze_stream.back().t);
  }
  if (!frames.empty()) {
    lo = std::max(lo, frames.front().t);
    hi = std::min(hi, frames.back().t);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {};
  return {lo, hi};
}

long gaze_index_bound(double duration, double rate_hz) {
  return static_cast<long>(std::floor(duration * rate_hz - 1.0 + kIndexEpsilon));
}

std::vector<GazeRecord> gaze_window(std::span<const GazeRecord> stream, TimeInterval interval,
                                    double rate_hz) {
  if (!(rate_hz > 0) || !(interval.start <= interval.end)) {
    throw Error(ErrorCode::DegenerateInterval, "need t_a <= t_b and a positive rate");
  }
  const auto by_time = [](const GazeRecord& r, double t) { return r.t < t; };
  const auto first_inside =
      std::lower_bound(stream.begin(), stream.end(), interval.start, by_time);
  if (first_inside == stream.end() || first_inside->t > interval.end) {
    throw Error(ErrorCode::EmptyWindow, "no gaze record inside [" + std::to_string(interval.start) +
                                            ", " + std::to_string(interval.end) + "]");
  }
  const long bound = gaze_index_bound(interval.duration(), rate_hz);
  if (bound < 0) {
    throw Error(ErrorCode::DegenerateInterval,
                "interval of " + std::to_string(interval.duration()) + " s holds no head-pose tick");
  }

  std::vector<GazeRecord> out;
  out.reserve(static_cast<std::size_t>(bound) + 1);
  for (long n = 0; n <= bound; ++n) {
    const double tick = interval.start + static_cast<double>(n) / rate_hz;
    auto it = std::lower_bound(stream.begin(), stream.end(), tick, by_time);
    if (it == stream.end()) {
      it = std::prev(it);
    } else if (it != stream.begin()) {
      const auto before = std::prev(it);
      // Ties go to the earlier record.
      if (tick - before->t <= it->t - tick) it = before;
    }
    out.push_back(*it);
  }
  return out;
}

std::optional<std::size_t> find_word(const Transcript& transcript, std::string_view word,
                                     std::size_t occurrence) {
  const std::string key = normalize_text(word);
  if (key.empty()) return std::nullopt;
  std::size_t seen = 0;
  const auto& tokens = transcript.tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != key) continue;
    if (seen++ == occurrence) return i;
  }
  return std::nullopt;
}

TimeInterval word_interval(const Transcript& transcript, std::string_view word,
                           std::size_t occurrence, double padding,
                           std::optional<TimeInterval> bounds) {
  const auto index = find_word(transcript, word, occurrence);
  if (!index) {
    throw Error(ErrorCode::WordNotFound, "'" + std::string(word) + "' occurrence " +
                                             std::to_string(occurrence) + " not in transcript");
  }
  const WordTiming& w = transcript.words()[*index];
  TimeInterval out{w.t_start - padding, w.t_end + padding};
  if (bounds) {
    out.start = std::clamp(out.start, bounds->start, bounds->end);
    out.end = std::clamp(out.end, bounds->start, bounds->end);
  }
  return out;
}

}  // namespace gazeintent
