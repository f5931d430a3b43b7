#include "endorhythm/lexi.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>

#include "endorhythm/error.hpp"
#include "endorhythm/http.hpp"
#include "endorhythm/strings.hpp"

#ifndef ENDORHYTHM_RESOURCE_DIR
#define ENDORHYTHM_RESOURCE_DIR "resources"
#endif

namespace endorhythm::lexi {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto w = str::trim(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(str::lower(w));
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) tokens.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '\'') continue;
    // U+2019 RIGHT SINGLE QUOTATION MARK
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      i += 2;
      continue;
    }
    if (std::isalpha(c) && c < 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "i",       "me",       "my",       "myself",  "we",      "our",        "ours",
      "ourselves", "you",    "your",     "yours",   "yourself", "yourselves", "he",
      "him",     "his",      "himself",  "she",     "her",     "hers",       "herself",
      "it",      "its",      "itself",   "they",    "them",    "their",      "theirs",
      "themselves", "what",  "which",    "who",     "whom",    "this",       "that",
      "these",   "those",    "am",       "is",      "are",     "was",        "were",
      "be",      "been",     "being",    "have",    "has",     "had",        "having",
      "do",      "does",     "did",      "doing",   "a",       "an",         "the",
      "and",     "but",      "if",       "or",      "because", "as",         "until",
      "while",   "of",       "at",       "by",      "for",     "with",       "about",
      "against", "between",  "into",     "through", "during",  "before",     "after",
      "above",   "below",    "to",       "from",    "up",      "down",       "in",
      "out",     "on",       "off",      "over",    "under",   "again",      "further",
      "then",    "once",     "here",     "there",   "when",    "where",      "why",
      "how",     "all",      "any",      "both",    "each",    "few",        "more",
      "most",    "other",    "some",     "such",    "no",      "nor",        "not",
      "only",    "own",      "same",     "so",      "than",    "too",        "very",
      "s",       "t",        "can",      "will",    "just",    "don",        "should",
      "now"};
  return words;
}

std::vector<PhaseKeywords> tfidf_keywords(const std::vector<PhaseGroup>& groups, std::size_t k) {
  if (groups.size() < 2) throw DomainError("tfidf_keywords needs at least two phase groups");
  const auto& stop = stopwords();

  std::vector<std::map<std::string, std::size_t>> counts(groups.size());
  std::vector<std::size_t> lengths(groups.size(), 0);
  std::map<std::string, std::size_t> doc_freq;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& text : groups[g].texts) {
      for (auto& tok : tokenize(text)) {
        if (stop.contains(tok)) continue;
        ++counts[g][tok];
        ++lengths[g];
      }
    }
    for (const auto& [term, _] : counts[g]) ++doc_freq[term];
  }

  const double n_docs = static_cast<double>(groups.size());
  std::vector<PhaseKeywords> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    PhaseKeywords pk{groups[g].label, {}};
    for (const auto& [term, count] : counts[g]) {
      const double tf = static_cast<double>(count) / static_cast<double>(lengths[g]);
      const double df = static_cast<double>(doc_freq[term]);
      // df == n_docs gives exactly ln(1) = 0
      const double idf = df == n_docs ? 0.0 : std::log(n_docs / df);
      pk.keywords.push_back({term, tf * idf});
    }
    std::sort(pk.keywords.begin(), pk.keywords.end(), [](const auto& a, const auto& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.term < b.term;
    });
    if (pk.keywords.size() > k) pk.keywords.resize(k);
    out.push_back(std::move(pk));
  }
  return out;
}

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::Happy: return "happy";
    case Emotion::Sad: return "sad";
    case Emotion::Fear: return "fear";
    case Emotion::Anger: return "anger";
    case Emotion::Surprise: return "surprise";
  }
  return "?";
}

void EmotionLexicon::add(std::string word, Emotion e) {
  words_[str::lower(word)] |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(e));
}

std::uint8_t EmotionLexicon::lookup(std::string_view word) const {
  auto it = words_.find(std::string(word));
  return it == words_.end() ? 0 : it->second;
}

EmotionLexicon EmotionLexicon::parse(std::istream& in) {
  static const std::map<std::string, Emotion> names = {
      {"joy", Emotion::Happy},     {"happy", Emotion::Happy},   {"sadness", Emotion::Sad},
      {"sad", Emotion::Sad},       {"fear", Emotion::Fear},     {"anger", Emotion::Anger},
      {"surprise", Emotion::Surprise}};
  EmotionLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = str::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = str::split(t, '\t');
    if (fields.size() != 3) throw ParseError(lineno, "expected word<TAB>emotion<TAB>flag");
    if (fields[2] != "0" && fields[2] != "1") throw ParseError(lineno, "flag must be 0 or 1");
    if (fields[2] == "0") continue;
    auto it = names.find(str::lower(fields[1]));
    if (it == names.end()) continue;
    lex.add(fields[0], it->second);
  }
  return lex;
}

EmotionLexicon EmotionLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in);
}

EmotionVector emotion_proportions(std::span<const std::string> tokens, const EmotionLexicon& lexicon) {
  EmotionVector v;
  if (tokens.empty()) return v;
  std::array<std::size_t, 5> hits{};
  for (const auto& tok : tokens) {
    const auto mask = lexicon.lookup(tok);
    for (std::size_t i = 0; i < hits.size(); ++i)
      if (mask & (1u << i)) ++hits[i];
  }
  for (std::size_t i = 0; i < hits.size(); ++i)
    v.share[i] = static_cast<double>(hits[i]) / static_cast<double>(tokens.size());
  return v;
}

void ValenceLexicon::add(std::string word, int polarity) {
  words_[str::lower(word)] = polarity > 0 ? 1 : -1;
}

int ValenceLexicon::lookup(std::string_view word) const {
  auto it = words_.find(std::string(word));
  return it == words_.end() ? 0 : it->second;
}

ValenceLexicon ValenceLexicon::parse(std::istream& in) {
  ValenceLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = str::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = str::split(t, '\t');
    if (fields.size() != 2) throw ParseError(lineno, "expected word<TAB>polarity");
    const auto& p = fields[1];
    if (p == "+1" || p == "1" || p == "positive") {
      lex.add(fields[0], 1);
    } else if (p == "-1" || p == "negative") {
      lex.add(fields[0], -1);
    } else {
      throw ParseError(lineno, "polarity must be +1 or -1");
    }
  }
  return lex;
}

ValenceLexicon ValenceLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in);
}

double sentiment_polarity(std::span<const std::string> tokens, const ValenceLexicon& valence) {
  long pos = 0, neg = 0;
  for (const auto& tok : tokens) {
    const int v = valence.lookup(tok);
    if (v > 0) ++pos;
    if (v < 0) ++neg;
  }
  if (pos + neg == 0) return 0.0;
  return static_cast<double>(pos - neg) / static_cast<double>(pos + neg);
}

double avg_word_length(std::span<const std::string> tokens) {
  if (tokens.empty()) return 0.0;
  std::size_t chars = 0;
  for (const auto& t : tokens) chars += t.size();
  return static_cast<double>(chars) / static_cast<double>(tokens.size());
}

LexiconFemaleness::LexiconFemaleness(std::unordered_set<std::string> female,
                                     std::unordered_set<std::string> male)
    : female_(std::move(female)), male_(std::move(male)) {}

LexiconFemaleness LexiconFemaleness::load(const std::filesystem::path& female_list,
                                          const std::filesystem::path& male_list) {
  return LexiconFemaleness(load_word_list(female_list), load_word_list(male_list));
}

double LexiconFemaleness::score(std::string_view text) {
  long f = 0, m = 0;
  for (const auto& tok : tokenize(text)) {
    if (female_.contains(tok)) ++f;
    if (male_.contains(tok)) ++m;
  }
  if (f + m == 0) return 0.5;
  return static_cast<double>(f) / static_cast<double>(f + m);
}

RemoteFemaleness::RemoteFemaleness(std::string url, std::chrono::duration<double> timeout)
    : url_(std::move(url)), timeout_(timeout) {}

double female_probability_from_response(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ScoringError(std::string("classifier returned invalid JSON: ") + e.what());
  }
  if (j.is_array() && !j.empty() && j.front().is_array()) j = j.front();
  if (!j.is_array()) throw ScoringError("classifier response is not a list of label scores");
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("label") || !entry.contains("score")) continue;
    if (!entry["label"].is_string() || !entry["score"].is_number()) continue;
    const auto label = str::lower(entry["label"].get<std::string>());
    if (label.rfind("female", 0) == 0 || label == "f") {
      const double p = entry["score"].get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw ScoringError("classifier probability outside [0,1]");
      return p;
    }
  }
  throw ScoringError("classifier response has no female label");
}

double RemoteFemaleness::score(std::string_view text) {
  const nlohmann::json req = {{"inputs", std::string(text)}};
  http::Response res;
  try {
    res = http::post_json(url_, req.dump(), {}, timeout_);
  } catch (const Error& e) {
    throw ScoringError(std::string("femaleness endpoint unreachable: ") + e.what());
  }
  if (res.status != 200)
    throw ScoringError("femaleness endpoint returned HTTP " + std::to_string(res.status));
  return female_probability_from_response(res.body);
}

Resources Resources::load(const std::filesystem::path& dir) {
  return {EmotionLexicon::load(dir / "nrc_emotion_lexicon.txt"), ValenceLexicon::load(dir / "valence.txt")};
}

LexiReport analyze_text(std::string_view text, const Resources& res, FemalenessBackend& femaleness) {
  const auto tokens = tokenize(text);
  LexiReport r;
  r.emotions = emotion_proportions(tokens, res.emotions);
  r.sentiment = sentiment_polarity(tokens, res.valence);
  r.avg_word_length = avg_word_length(tokens);
  r.femaleness = femaleness.score(text);
  r.token_count = tokens.size();
  return r;
}

std::filesystem::path default_resource_dir() {
  if (const char* env = std::getenv("ENDORHYTHM_RESOURCES"); env && *env) return env;
  return ENDORHYTHM_RESOURCE_DIR;
}

}  // namespace endorhythm::lexi
