#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace endorhythm::lexi {

// Lower-case alphabetic tokens of length >= 2; apostrophes are removed
// before splitting so "I'm" becomes "im".
std::vector<std::string> tokenize(std::string_view text);

// English stopword list excluded from keyword extraction (127 entries).
const std::unordered_set<std::string>& stopwords();

struct PhaseGroup {
  std::string label;
  std::vector<std::string> texts;
};

struct KeywordScore {
  std::string term;
  double score = 0.0;
};

struct PhaseKeywords {
  std::string label;
  std::vector<KeywordScore> keywords;
};

// TF-IDF over one concatenated document per group. Result order follows
// the input groups; within a group, descending score then term.
std::vector<PhaseKeywords> tfidf_keywords(const std::vector<PhaseGroup>& groups, std::size_t k);

enum class Emotion { Happy, Sad, Fear, Anger, Surprise };
inline constexpr std::array<Emotion, 5> kEmotions = {Emotion::Happy, Emotion::Sad, Emotion::Fear,
                                                     Emotion::Anger, Emotion::Surprise};
std::string_view to_string(Emotion e);

struct EmotionVector {
  std::array<double, 5> share{};  // indexed by Emotion

  double operator[](Emotion e) const { return share[static_cast<std::size_t>(e)]; }
  double& operator[](Emotion e) { return share[static_cast<std::size_t>(e)]; }
  bool operator==(const EmotionVector&) const = default;
};

// Word to emotion-set associations in NRC format. NRC's joy and sadness
// map to Happy and Sad; emotions outside the five tracked ones are ignored.
class EmotionLexicon {
 public:
  EmotionLexicon() = default;

  static EmotionLexicon parse(std::istream& in);
  static EmotionLexicon load(const std::filesystem::path& path);

  void add(std::string word, Emotion e);
  // Bit i set when the word is associated with kEmotions[i].
  std::uint8_t lookup(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_map<std::string, std::uint8_t> words_;
};

EmotionVector emotion_proportions(std::span<const std::string> tokens, const EmotionLexicon& lexicon);

// Word to +1/-1 valence.
class ValenceLexicon {
 public:
  ValenceLexicon() = default;
  static ValenceLexicon parse(std::istream& in);
  static ValenceLexicon load(const std::filesystem::path& path);

  void add(std::string word, int polarity);
  int lookup(std::string_view word) const;  // 0 when absent

 private:
  std::unordered_map<std::string, int> words_;
};

double sentiment_polarity(std::span<const std::string> tokens, const ValenceLexicon& valence);

double avg_word_length(std::span<const std::string> tokens);

class FemalenessBackend {
 public:
  virtual ~FemalenessBackend() = default;
  // Probability in [0,1] that the text is female-coded. Throws ScoringError
  // when the backend cannot produce a score.
  virtual double score(std::string_view text) = 0;
};

// f / (f + m) over female- and male-coded word hits; 0.5 with no hits.
class LexiconFemaleness : public FemalenessBackend {
 public:
  LexiconFemaleness(std::unordered_set<std::string> female, std::unordered_set<std::string> male);
  static LexiconFemaleness load(const std::filesystem::path& female_list,
                                const std::filesystem::path& male_list);
  double score(std::string_view text) override;

 private:
  std::unordered_set<std::string> female_;
  std::unordered_set<std::string> male_;
};

// Generic text-classification endpoint: POST {"inputs": text} and read
// back label/score pairs, either flat `[{label, score}]` or nested
// `[[{label, score}]]`. The score of the first label whose lower-cased
// name starts with "female" (or equals "f") is returned verbatim.
class RemoteFemaleness : public FemalenessBackend {
 public:
  explicit RemoteFemaleness(std::string url,
                            std::chrono::duration<double> timeout = std::chrono::seconds(30));
  double score(std::string_view text) override;

 private:
  std::string url_;
  std::chrono::duration<double> timeout_;
};

// Parses a classifier response body; exposed for testing.
double female_probability_from_response(std::string_view body);

struct Resources {
  EmotionLexicon emotions;
  ValenceLexicon valence;

  // Loads nrc_emotion_lexicon.txt and valence.txt from `dir`.
  static Resources load(const std::filesystem::path& dir);
};

struct LexiReport {
  EmotionVector emotions;
  double sentiment = 0.0;
  double avg_word_length = 0.0;
  double femaleness = 0.5;
  std::size_t token_count = 0;
};

LexiReport analyze_text(std::string_view text, const Resources& res, FemalenessBackend& femaleness);

// Directory holding the shipped lexicons and word lists.
std::filesystem::path default_resource_dir();

}  // namespace endorhythm::lexi
