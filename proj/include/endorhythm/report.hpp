#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "endorhythm/bench.hpp"
#include "endorhythm/rhythm.hpp"
#include "endorhythm/stats.hpp"

namespace endorhythm::report {

enum class GroupingKind { ByPhase, ByHormoneQuintile, ByCondition };

struct Grouping {
  GroupingKind kind = GroupingKind::ByCondition;
  Signal signal = Signal::Cortisol;  // ByHormoneQuintile only
  bool per_model = false;

  static Grouping by_phase(bool per_model = false) { return {GroupingKind::ByPhase, Signal::Cortisol, per_model}; }
  static Grouping by_quintile(Signal s, bool per_model = false) {
    return {GroupingKind::ByHormoneQuintile, s, per_model};
  }
  static Grouping by_condition(bool per_model = false) {
    return {GroupingKind::ByCondition, Signal::Cortisol, per_model};
  }

  // "phase", "cortisol_quintile", "condition", with "_by_model" appended when split.
  std::string name() const;
};

// Parses the names produced by Grouping::name().
Grouping parse_grouping(std::string_view name);

struct AggregateCell {
  std::string group_key;  // dataset|condition|group[|model]
  std::string dataset;
  Condition condition = Condition::Baseline;
  std::string group;  // phase name, Q1..Q5, or condition name
  std::string model;  // empty unless split by model
  std::size_t n = 0;
  double mean_score = 0.0;
  std::size_t correct = 0;  // scores >= 0.5
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
};

// Cells for one grouping over the non-error results, in a fixed order.
// Baseline results have no phase or hormones and form a "Baseline" group
// under the phase and quintile groupings. Quintiles are computed per
// (dataset, condition). Throws DomainError when no scored result remains.
std::vector<AggregateCell> aggregate(const std::vector<bench::BenchResult>& results, const Grouping& grouping);

struct Comparison {
  stats::TestKind kind;
  std::string scope;  // dataset|model|what was compared
  std::optional<stats::TestResult> result;
  std::string note;  // reason when the test was skipped
};

// Welch t of each hormonal condition against baseline, ANOVA across phases
// and Pearson r of every signal against score within each hormonal
// condition. Degenerate inputs are recorded with a note instead of a result.
// Throws DomainError when there are no baseline results.
std::vector<Comparison> compare_conditions(const std::vector<bench::BenchResult>& results,
                                           const std::string& dataset, const std::string& model);

// compare_conditions for every (dataset, model) pair that has baseline results.
std::vector<Comparison> compare_all(const std::vector<bench::BenchResult>& results);

struct Table {
  std::string name;
  std::vector<AggregateCell> cells;
};

// Writes {name}.csv per table, chart_{dataset}.svg per dataset and
// summary.txt. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const std::vector<Table>& tables,
                                               const std::vector<Comparison>& tests,
                                               const std::filesystem::path& out_dir,
                                               std::optional<std::uint64_t> seed = std::nullopt);

std::string cells_csv(const std::vector<AggregateCell>& cells);
std::string summary_text(const std::vector<Comparison>& tests, std::optional<std::uint64_t> seed);
std::string chart_svg(const std::string& dataset, const std::vector<Table>& tables);

}  // namespace endorhythm::report
