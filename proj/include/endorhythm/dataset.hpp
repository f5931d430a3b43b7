#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace endorhythm::data {

enum class DatasetKind { SQuAD, MMLU, Hellaswag, ARC };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct Choice {
  std::string label;  // "A".."E"
  std::string text;
};

struct BenchItem {
  DatasetKind dataset = DatasetKind::ARC;
  std::string item_id;
  std::string question;  // includes the passage (SQuAD) or context (Hellaswag)
  std::vector<Choice> choices;  // empty for SQuAD
  // Gold choice label for multiple-choice items; acceptable answers for SQuAD.
  std::vector<std::string> gold;

  bool multiple_choice() const { return !choices.empty(); }
};

// Parses one dataset file. Formats:
//   SQuAD      v1.1 JSON document, data[].paragraphs[].qas[]
//   MMLU       headerless CSV: question,A,B,C,D,answer (letter or 0-3 index)
//   Hellaswag  JSON lines with ctx, endings[4], label 0-3
//   ARC        JSON lines with question.stem, question.choices[].{label,text}, answerKey
// Errors carry the 1-based line (line-delimited formats, MMLU record start
// line) or the 1-based question index (SQuAD).
std::vector<BenchItem> parse_dataset(DatasetKind kind, std::istream& in);

// parse_dataset plus a seeded uniform subsample of `limit` items kept in
// file order. limit == 0 or limit >= size returns every item.
std::vector<BenchItem> load_dataset(DatasetKind kind, const std::filesystem::path& path,
                                    std::size_t limit, std::uint64_t seed);

std::vector<BenchItem> subsample(std::vector<BenchItem> items, std::size_t limit, std::uint64_t seed);

// Lower-case, strip punctuation, drop articles, collapse whitespace.
std::string normalize_text_answer(std::string_view raw);

}  // namespace endorhythm::data
