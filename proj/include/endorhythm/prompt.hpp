#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "endorhythm/rhythm.hpp"

namespace endorhythm {

namespace llm {
class Gateway;
}

inline constexpr std::string_view kBaselinePrompt = "You are a helpful assistant.";

enum class Condition { Menstrual, Circadian, Baseline };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view name);
Condition condition_for(CycleKind kind);

enum class BandLevel { Low, Mid, High };
std::string_view to_string(BandLevel level);

struct ToneBand {
  Signal signal;
  double low_threshold = 0.33;
  double high_threshold = 0.66;
  std::vector<std::string> low;
  std::vector<std::string> mid;
  std::vector<std::string> high;

  // Level below low_threshold is Low, above high_threshold is High.
  BandLevel level_for(double normalized) const;
  const std::vector<std::string>& descriptors(BandLevel level) const;
  void validate() const;
};

std::vector<ToneBand> default_bands();

// INI-style band file:
//   [estrogen]
//   low_threshold = 0.33
//   high_threshold = 0.66
//   low = heavy, silence
//   mid = steady
//   high = radiant
std::vector<ToneBand> load_bands(const std::filesystem::path& path);

std::vector<std::string> default_contexts();
// One locative phrase per line ("at a hardware store in Argentina").
std::vector<std::string> load_contexts(const std::filesystem::path& path);

// One tone sentence: which band level of a signal was used and the
// descriptors drawn from it.
struct ToneChoice {
  Signal signal;
  BandLevel level;
  std::vector<std::string> descriptors;
};

struct PromptRecord {
  std::string id;
  Condition condition = Condition::Baseline;
  std::optional<CyclePoint> point;
  std::optional<Phase> phase;
  std::optional<HormoneState> hormones;
  std::string context;
  std::string text;
  std::string template_id;
  std::uint64_t seed = 0;
  bool elaborated = false;
  std::string source_text;
  std::string error;  // annotation from a failed elaboration, not persisted
  std::vector<ToneChoice> tone;  // not persisted
};

// Renders a first-person system prompt for one hormonal state. The same
// inputs and seed always give the same text.
PromptRecord render_prompt(const HormoneState& state, const CyclePoint& point, Phase phase,
                           std::string_view context, std::span<const ToneBand> bands,
                           std::uint64_t seed);

// One record per (sample, context); ids are `{condition}-{position}-{context_index}`.
std::vector<PromptRecord> build_corpus(std::span<const CycleSample> samples,
                                       std::span<const std::string> contexts,
                                       std::span<const ToneBand> bands, std::uint64_t seed);

PromptRecord baseline_record(std::string_view text = kBaselinePrompt);

// Asks the generator to rewrite the prompt as first-person stream of
// consciousness. On failure the record comes back unchanged with `error` set.
PromptRecord elaborate_prompt(const PromptRecord& record, llm::Gateway& generator);

std::string elaboration_instruction();

// Corpus file: one JSON object per line, fields in fixed order
// id, condition, position, phase, context, template_id, seed, text, elaborated, source_text.
void write_corpus(std::ostream& out, std::span<const PromptRecord> records);
std::vector<PromptRecord> read_corpus(std::istream& in);

// Fills `hormones` of non-baseline records from samples with matching
// kind and position (compared at 2 decimal places). Throws ConfigError
// when a record has no matching sample.
void attach_hormones(std::vector<PromptRecord>& records, std::span<const CycleSample> samples);

std::string format_position(double position);

}  // namespace endorhythm
