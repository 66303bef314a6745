#include "gazeintent/interpreter.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "gazeintent/error.hpp"

namespace gazeintent {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kArticles = {"the", "a", "an"};
const std::set<std::string, std::less<>> kDemonstratives = {"this", "that", "these", "those"};
const std::set<std::string, std::less<>> kLocatives = {"here", "there"};
const std::set<std::string, std::less<>> kPrepositions = {
    "on", "in", "onto", "into", "to", "at", "from", "inside", "over", "under", "near",
    "beside", "above", "below", "behind", "between", "next", "of", "with"};
const std::set<std::string, std::less<>> kFunctionWords = {
    "please", "put", "place", "set", "pick", "up", "grab", "take", "get", "lift", "raise",
    "lower", "turn", "rotate", "pour", "swap", "exchange", "move", "and", "then", "some",
    "something", "thing", "things", "for", "by", "degrees", "degree", "cm", "centimeter",
    "centimeters", "centimetre", "centimetres", "mm", "millimeter", "millimeters", "m",
    "meter", "meters", "metre", "metres", "it", "me", "can", "you", "could", "would", "robot",
    "now", "down", "also", "again", "back", "them", "its", "okay", "ok", "hey", "let", "lets",
    "go", "do", "just", "is", "are", "be", "i", "want", "need", "clockwise", "counterclockwise",
    "left", "right", "forward", "backward", "by", "around", "over"};

bool is_number(std::string_view tok) {
  if (tok.empty()) return false;
  bool dot = false;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (tok[i] == '.') {
      if (dot || i == 0 || i + 1 == tok.size()) return false;
      dot = true;
    } else if (!std::isdigit(static_cast<unsigned char>(tok[i]))) {
      return false;
    }
  }
  return true;
}

bool is_content(std::string_view tok) {
  return !tok.empty() && !is_number(tok) && !kArticles.contains(tok) &&
         !kDemonstratives.contains(tok) && !kLocatives.contains(tok) &&
         !kPrepositions.contains(tok) && !kFunctionWords.contains(tok);
}

struct Candidate {
  TargetProperty property;
  std::string category;
  std::size_t word_index;
};

// Returns one past the last content word of the run starting at `from`.
std::size_t content_run_end(const std::vector<std::string>& t, std::size_t from) {
  std::size_t j = from;
  while (j < t.size() && is_content(t[j])) ++j;
  return j;
}

std::vector<Candidate> scan(const std::vector<std::string>& t) {
  std::vector<Candidate> out;
  std::size_t i = 0;
  const auto prev = [&](std::size_t k) -> std::string_view {
    while (k > 0) {
      --k;
      if (!t[k].empty()) return t[k];
    }
    return {};
  };
  while (i < t.size()) {
    const std::string& tok = t[i];
    if (tok.empty()) {
      ++i;
    } else if (tok == "pour") {
      // The poured substance is not a target.
      ++i;
      while (i < t.size() && !kPrepositions.contains(t[i])) ++i;
    } else if (kDemonstratives.contains(tok)) {
      const std::size_t end = content_run_end(t, i + 1);
      if (end > i + 1) {
        out.push_back({TargetProperty::Object, t[end - 1], end - 1});
        i = end;
      } else {
        out.push_back({TargetProperty::Object, std::string(kGenericCategory), i});
        ++i;
      }
    } else if (tok == "it") {
      if (kPrepositions.contains(prev(i))) {
        out.push_back({TargetProperty::Object, std::string(kGenericCategory), i});
      }
      ++i;
    } else if (kLocatives.contains(tok)) {
      std::string category(kPositionCategory);
      std::size_t next = i + 1;
      if (next < t.size() && (t[next] == "on" || t[next] == "in" || t[next] == "at")) {
        std::size_t k = next + 1;
        if (k < t.size() && kArticles.contains(t[k])) ++k;
        const std::size_t end = content_run_end(t, k);
        if (end > k) {
          category = t[end - 1];
          next = end;
        }
      }
      out.push_back({TargetProperty::Position, category, i});
      i = next;
    } else if (kArticles.contains(tok)) {
      const std::size_t end = content_run_end(t, i + 1);
      if (end > i + 1) out.push_back({TargetProperty::Object, t[end - 1], end - 1});
      i = std::max(end, i + 1);
    } else if (is_content(tok)) {
      out.push_back({TargetProperty::Object, tok, i});
      ++i;
    } else {
      ++i;
    }
  }
  return out;
}

std::size_t occurrence_of(const std::vector<std::string>& t, std::size_t index) {
  return static_cast<std::size_t>(std::count(t.begin(), t.begin() + static_cast<long>(index), t[index]));
}

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::MalformedAgentOutput, path + ": " + what);
}

const json& field(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(path + "." + key, "missing");
  return *it;
}

std::string string_field(const json& obj, const std::string& path, const char* key) {
  const json& v = field(obj, path, key);
  if (!v.is_string()) malformed(path + "." + key, "expected string, got " + std::string(v.type_name()));
  return v.get<std::string>();
}

double number_field(const json& obj, const std::string& path, const char* key) {
  const json& v = field(obj, path, key);
  if (!v.is_number()) malformed(path + "." + key, "expected number, got " + std::string(v.type_name()));
  return v.get<double>();
}

}  // namespace

InterpretedCommand interpret_rule_based(const Transcript& transcript, double padding,
                                        std::optional<TimeInterval> bounds) {
  if (transcript.empty()) throw Error(ErrorCode::NoTargetFound, "empty transcript");
  const auto& tokens = transcript.tokens();
  const std::vector<Candidate> found = scan(tokens);
  if (found.empty()) {
    throw Error(ErrorCode::NoTargetFound, "no referential expression in '" + transcript.raw_text() + "'");
  }
  const TimeInterval clamp = bounds.value_or(transcript.span());
  InterpretedCommand cmd;
  cmd.transcript = transcript;
  for (const Candidate& c : found) {
    TargetSlot slot;
    slot.property = c.property;
    slot.category = c.category;
    slot.source_word = tokens[c.word_index];
    slot.occurrence = occurrence_of(tokens, c.word_index);
    slot.interval = word_interval(transcript, slot.source_word, slot.occurrence, padding, clamp);
    cmd.slots.push_back(std::move(slot));
  }
  std::stable_sort(cmd.slots.begin(), cmd.slots.end(), [](const TargetSlot& a, const TargetSlot& b) {
    return a.interval.start < b.interval.start;
  });
  return cmd;
}

json transcript_json(const Transcript& transcript) {
  json words = json::array();
  for (const WordTiming& w : transcript.words()) {
    words.push_back({{"text", w.text}, {"t_start", w.t_start}, {"t_end", w.t_end}});
  }
  return {{"text", transcript.raw_text()}, {"words", words}};
}

Transcript transcript_from_json(const json& j) {
  std::vector<WordTiming> words;
  for (const json& w : j.at("words")) {
    words.push_back({w.at("text").get<std::string>(), w.at("t_start").get<double>(),
                     w.at("t_end").get<double>()});
  }
  if (j.contains("text")) return Transcript(std::move(words), j.at("text").get<std::string>());
  return Transcript::from_words(std::move(words));
}

AgentRequest interpret_request(const Transcript& transcript, const InterpreterConfig& cfg) {
  AgentRequest req;
  req.prompt_template_id = std::string(kInterpretTemplate);
  req.model_id = cfg.model_id;
  req.temperature = cfg.temperature;
  req.variables["transcript"] = transcript.raw_text();
  req.variables["words"] = transcript_json(transcript).at("words").dump();
  return req;
}

InterpretedCommand interpret(const Transcript& transcript, const InterpreterConfig& cfg) {
  if (cfg.mode == AgentMode::RuleBased) {
    return interpret_rule_based(transcript, cfg.padding, cfg.bounds);
  }
  if (!cfg.agent) throw Error(ErrorCode::RemoteAgentError, "remote interpreter has no agent endpoint");
  if (transcript.empty()) throw Error(ErrorCode::NoTargetFound, "empty transcript");
  AgentResponse resp;
  try {
    resp = cfg.agent->complete(interpret_request(transcript, cfg));
  } catch (const Error& e) {
    throw Error(ErrorCode::RemoteAgentError, e.what());
  }
  InterpretedCommand cmd = validate_o1(resp.text, transcript).command;
  if (cfg.padding != 0.0) {
    const TimeInterval clamp = cfg.bounds.value_or(transcript.span());
    for (TargetSlot& s : cmd.slots) {
      s.interval = word_interval(transcript, s.source_word, s.occurrence, cfg.padding, clamp);
    }
  }
  return cmd;
}

json o1_json(const InterpretedCommand& cmd) {
  json slots = json::array();
  for (const TargetSlot& s : cmd.slots) {
    slots.push_back({{"label", std::string(to_string(s.property))},
                     {"category", s.category},
                     {"word", s.source_word},
                     {"occurrence", s.occurrence},
                     {"t_start", s.interval.start},
                     {"t_end", s.interval.end}});
  }
  return {{"slots", slots}};
}

std::string serialize_o1(const InterpretedCommand& cmd) { return o1_json(cmd).dump(); }

std::string strip_code_fence(std::string_view raw) {
  std::string s(raw);
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  s = s.substr(first);
  s.erase(s.find_last_not_of(" \t\r\n") + 1);
  if (s.rfind("```", 0) != 0 || s.size() < 6 || s.compare(s.size() - 3, 3, "```") != 0) return s;
  const auto body = s.find('\n');
  if (body == std::string::npos) return s;
  std::string inner = s.substr(body + 1, s.size() - 3 - (body + 1));
  inner.erase(inner.find_last_not_of(" \t\r\n") + 1);
  return inner;
}

O1Validation validate_o1(std::string_view raw, const Transcript& transcript) {
  json doc;
  try {
    doc = json::parse(strip_code_fence(raw));
  } catch (const json::parse_error& e) {
    malformed("$", std::string("not JSON (byte ") + std::to_string(e.byte) + ")");
  }
  if (!doc.is_object()) malformed("$", "expected an object with a 'slots' array");
  const json& slots = field(doc, "$", "slots");
  if (!slots.is_array()) malformed("$.slots", "expected array");
  if (slots.empty()) malformed("$.slots", "no slots");

  const TimeInterval span = transcript.span();
  O1Validation out;
  out.command.transcript = transcript;
  std::map<std::string, std::size_t> next_occurrence;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string path = "$.slots[" + std::to_string(i) + "]";
    const json& s = slots[i];
    if (!s.is_object()) malformed(path, "expected object");
    TargetSlot slot;
    const std::string label = string_field(s, path, "label");
    const auto property = target_property_from(label);
    if (!property) malformed(path + ".label", "'" + label + "' is neither object nor position");
    slot.property = *property;
    slot.category = normalize_text(string_field(s, path, "category"));
    if (slot.category.empty()) malformed(path + ".category", "empty");
    slot.source_word = normalize_text(string_field(s, path, "word"));
    if (s.contains("occurrence")) {
      const json& occ = s.at("occurrence");
      if (!occ.is_number_integer() || occ.get<long>() < 0) {
        malformed(path + ".occurrence", "expected non-negative integer");
      }
      slot.occurrence = occ.get<std::size_t>();
    } else {
      slot.occurrence = next_occurrence[slot.source_word];
    }
    next_occurrence[slot.source_word] = slot.occurrence + 1;
    if (!find_word(transcript, slot.source_word, slot.occurrence)) {
      malformed(path + ".word", "'" + slot.source_word + "' (occurrence " +
                                    std::to_string(slot.occurrence) + ") is not in the transcript");
    }
    slot.interval.start = number_field(s, path, "t_start");
    slot.interval.end = number_field(s, path, "t_end");
    if (!(slot.interval.start <= slot.interval.end)) malformed(path, "t_start > t_end");
    if (!span.contains(slot.interval)) {
      const TimeInterval clamped{std::clamp(slot.interval.start, span.start, span.end),
                                 std::clamp(slot.interval.end, span.start, span.end)};
      out.warnings.push_back(path + ": interval [" + std::to_string(slot.interval.start) + ", " +
                             std::to_string(slot.interval.end) + "] clamped to transcript span");
      slot.interval = clamped;
    }
    out.command.slots.push_back(std::move(slot));
  }
  std::stable_sort(out.command.slots.begin(), out.command.slots.end(),
                   [](const TargetSlot& a, const TargetSlot& b) {
                     return a.interval.start < b.interval.start;
                   });
  return out;
}

}  // namespace gazeintent
