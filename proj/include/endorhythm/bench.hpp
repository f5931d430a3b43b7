#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "endorhythm/dataset.hpp"
#include "endorhythm/prompt.hpp"
#include "endorhythm/rhythm.hpp"

namespace endorhythm {

namespace llm {
class Gateway;
}

namespace bench {

enum class Scorer { Judge, ExactMatch };
std::string_view to_string(Scorer s);

enum class SquadMatch { Contains, Equals };

struct BenchResult {
  std::string dataset;
  std::string item_id;
  std::string model;
  Condition condition = Condition::Baseline;
  std::string prompt_id;
  std::optional<double> cycle_position;
  std::optional<Phase> phase;
  std::optional<HormoneState> hormones;
  std::string response_text;
  std::optional<double> score;
  Scorer scorer = Scorer::ExactMatch;
  std::optional<std::string> error;
  std::string timestamp;
};

// (dataset, item_id, model, condition, prompt_id)
using ResultKey = std::tuple<std::string, std::string, std::string, std::string, std::string>;
ResultKey key_of(const BenchResult& r);

// Result log: one JSON object per line, BenchResult fields in declaration order.
std::string to_log_line(const BenchResult& r);
BenchResult from_log_line(const std::string& line);

// Reads every complete record. A truncated final line (interrupted write)
// is ignored; a malformed line elsewhere throws ParseError.
std::vector<BenchResult> read_results(std::istream& in);
std::vector<BenchResult> read_results(const std::filesystem::path& path);

struct DatasetSpec {
  data::DatasetKind kind;
  std::filesystem::path path;
  std::size_t limit = 0;
};

struct RunPlan {
  std::vector<DatasetSpec> datasets;
  std::vector<std::shared_ptr<llm::Gateway>> models;
  std::vector<Condition> conditions = {Condition::Menstrual, Condition::Circadian, Condition::Baseline};
  std::vector<PromptRecord> menstrual_corpus;
  std::vector<PromptRecord> circadian_corpus;
  std::string baseline_text = std::string(kBaselinePrompt);
  std::shared_ptr<llm::Gateway> judge;  // null selects exact matching
  SquadMatch squad_match = SquadMatch::Contains;
  std::uint64_t seed = 0;
  std::filesystem::path output_path;
  int workers = 4;
  // Stop after this many new results; simulates an interrupted run.
  std::optional<std::size_t> stop_after;

  void validate() const;
};

struct ConditionSummary {
  std::size_t results = 0;
  std::size_t errors = 0;
  double mean_score = 0.0;  // over non-error results in the whole log
};

struct RunSummary {
  std::size_t new_results = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;  // across the whole log
  std::map<Condition, ConditionSummary> conditions;
};

// Runs every (item, model, condition) not already in the log.
RunSummary run_benchmark(const RunPlan& plan);
RunSummary run_benchmark(const RunPlan& plan, const std::vector<data::BenchItem>& items);

RunSummary summarize(const std::vector<BenchResult>& results);

// Prompt for one item under one condition. Assignment is stratified: the
// n-th item of a dataset takes position slot n mod P of a seeded permutation
// of the corpus's P cycle positions, redrawn every P items.
const PromptRecord& assign_prompt(const std::vector<PromptRecord>& corpus, Condition condition,
                                  const std::string& dataset, std::size_t item_index,
                                  std::uint64_t seed);

// Question text sent as the user message.
std::string render_question(const data::BenchItem& item);

// 1.0 when the first standalone letter A-E equals the gold label
// (multiple choice) or the normalized response contains/equals a gold
// answer (SQuAD).
double exact_match_score(const data::BenchItem& item, const std::string& response,
                         SquadMatch mode = SquadMatch::Contains);

std::string judge_prompt(const data::BenchItem& item, const std::string& response);
std::optional<double> parse_judge_score(const std::string& reply);

// Asks the judge for a score in [0,1]; one re-ask on an unparseable reply.
// Throws ScoringError when the judge fails or never yields a number.
double judge_score(const data::BenchItem& item, const std::string& response, llm::Gateway& judge);

}  // namespace bench
}  // namespace endorhythm
