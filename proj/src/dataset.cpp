#include "endorhythm/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "endorhythm/csv.hpp"
#include "endorhythm/error.hpp"
#include "endorhythm/random.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm::data {

namespace {

using nlohmann::json;

std::string letter(std::size_t index) { return std::string(1, static_cast<char>('A' + index)); }

// ARC mixes "A".."E" and "1".."5" labels; both end up as letters.
std::string normalize_label(std::string label) {
  label = std::string(str::trim(label));
  if (label.size() == 1 && label[0] >= '1' && label[0] <= '5') return letter(label[0] - '1');
  if (label.size() == 1) label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
  return label;
}

void validate_choices(const BenchItem& item, std::size_t record) {
  if (item.choices.size() < 2 || item.choices.size() > 5)
    throw ValidationError(record, "expected 2-5 choices, got " + std::to_string(item.choices.size()));
  const auto& gold = item.gold.front();
  const bool known = std::any_of(item.choices.begin(), item.choices.end(),
                                 [&](const Choice& c) { return c.label == gold; });
  if (!known) throw ValidationError(record, "answer label '" + gold + "' is not one of the choices");
}

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (str::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
    }
    try {
      fn(j, lineno);
    } catch (const json::exception& e) {
      throw ParseError(lineno, std::string("missing or mistyped field: ") + e.what());
    }
  }
}

std::string id_or_line(const json& j, const char* key, std::size_t lineno) {
  if (j.contains(key)) {
    const auto& v = j[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
  }
  return "line-" + std::to_string(lineno);
}

std::vector<BenchItem> parse_arc(std::istream& in) {
  std::vector<BenchItem> items;
  for_each_json_line(in, [&](const json& j, std::size_t lineno) {
    BenchItem item;
    item.dataset = DatasetKind::ARC;
    item.item_id = id_or_line(j, "id", lineno);
    const auto& q = j.at("question");
    item.question = q.at("stem").get<std::string>();
    for (const auto& c : q.at("choices"))
      item.choices.push_back({normalize_label(c.at("label").get<std::string>()), c.at("text").get<std::string>()});
    item.gold = {normalize_label(j.at("answerKey").get<std::string>())};
    validate_choices(item, lineno);
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<BenchItem> parse_hellaswag(std::istream& in) {
  std::vector<BenchItem> items;
  for_each_json_line(in, [&](const json& j, std::size_t lineno) {
    BenchItem item;
    item.dataset = DatasetKind::Hellaswag;
    item.item_id = id_or_line(j, "ind", lineno);
    item.question = j.at("ctx").get<std::string>();
    const auto& endings = j.at("endings");
    if (!endings.is_array() || endings.size() != 4)
      throw ParseError(lineno, "endings must be a list of 4 strings");
    for (std::size_t i = 0; i < endings.size(); ++i)
      item.choices.push_back({letter(i), endings[i].get<std::string>()});
    const auto& label = j.at("label");
    long long idx = -1;
    if (label.is_number_integer()) {
      idx = label.get<long long>();
    } else if (label.is_string()) {
      idx = str::to_int<long long>(label.get<std::string>()).value_or(-1);
    } else {
      throw ParseError(lineno, "label must be an integer");
    }
    if (idx < 0 || idx > 3) throw ValidationError(lineno, "label must be in 0-3");
    item.gold = {letter(static_cast<std::size_t>(idx))};
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<BenchItem> parse_mmlu(std::istream& in) {
  std::vector<BenchItem> items;
  csv::Reader reader(in);
  std::size_t index = 0;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() == 1 && str::trim(f[0]).empty()) continue;
    if (f.size() != 6) throw ParseError(row->line, "expected 6 fields, got " + std::to_string(f.size()));
    BenchItem item;
    item.dataset = DatasetKind::MMLU;
    item.item_id = "mmlu-" + std::to_string(++index);
    item.question = f[0];
    for (std::size_t i = 0; i < 4; ++i) item.choices.push_back({letter(i), f[1 + i]});
    const auto answer = std::string(str::trim(f[5]));
    if (auto idx = str::to_int<int>(answer)) {
      if (*idx < 0 || *idx > 3) throw ValidationError(row->line, "answer index must be in 0-3");
      item.gold = {letter(static_cast<std::size_t>(*idx))};
    } else {
      item.gold = {normalize_label(answer)};
    }
    validate_choices(item, row->line);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<BenchItem> parse_squad(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("invalid SQuAD JSON: ") + e.what());
  }
  if (!doc.contains("data") || !doc["data"].is_array()) throw ParseError(0, "missing data array");

  std::vector<BenchItem> items;
  std::size_t record = 0;
  for (const auto& article : doc["data"]) {
    if (!article.contains("paragraphs") || !article["paragraphs"].is_array())
      throw ParseError(record + 1, "article without paragraphs");
    for (const auto& para : article["paragraphs"]) {
      if (!para.contains("qas") || !para["qas"].is_array())
        throw ParseError(record + 1, "paragraph without qas");
      for (const auto& qa : para["qas"]) {
        ++record;
        BenchItem item;
        item.dataset = DatasetKind::SQuAD;
        try {
          const auto context = para.at("context").get<std::string>();
          item.item_id = qa.at("id").get<std::string>();
          item.question = "Passage: " + context + "\n\nQuestion: " + qa.at("question").get<std::string>();
          for (const auto& a : qa.at("answers")) item.gold.push_back(a.at("text").get<std::string>());
        } catch (const json::exception& e) {
          throw ParseError(record, std::string("malformed question: ") + e.what());
        }
        if (item.gold.empty()) throw ValidationError(record, "question has no acceptable answers");
        items.push_back(std::move(item));
      }
    }
  }
  return items;
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::SQuAD: return "SQuAD";
    case DatasetKind::MMLU: return "MMLU";
    case DatasetKind::Hellaswag: return "Hellaswag";
    case DatasetKind::ARC: return "ARC";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (str::iequals(name, "squad")) return DatasetKind::SQuAD;
  if (str::iequals(name, "mmlu")) return DatasetKind::MMLU;
  if (str::iequals(name, "hellaswag")) return DatasetKind::Hellaswag;
  if (str::iequals(name, "arc") || str::iequals(name, "ai2_arc")) return DatasetKind::ARC;
  throw DomainError("unknown dataset kind: " + std::string(name));
}

std::vector<BenchItem> parse_dataset(DatasetKind kind, std::istream& in) {
  switch (kind) {
    case DatasetKind::SQuAD: return parse_squad(in);
    case DatasetKind::MMLU: return parse_mmlu(in);
    case DatasetKind::Hellaswag: return parse_hellaswag(in);
    case DatasetKind::ARC: return parse_arc(in);
  }
  return {};
}

std::vector<BenchItem> subsample(std::vector<BenchItem> items, std::size_t limit, std::uint64_t seed) {
  if (limit == 0 || limit >= items.size()) return items;
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  std::vector<BenchItem> out;
  out.reserve(limit);
  for (auto i : idx) out.push_back(std::move(items[i]));
  return out;
}

std::vector<BenchItem> load_dataset(DatasetKind kind, const std::filesystem::path& path,
                                    std::size_t limit, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  return subsample(parse_dataset(kind, in), limit, seed);
}

std::string normalize_text_answer(std::string_view raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::ispunct(c)) continue;
    cleaned.push_back(std::isspace(c) ? ' ' : static_cast<char>(std::tolower(c)));
  }
  std::istringstream words(cleaned);
  std::string out, w;
  while (words >> w) {
    if (w == "a" || w == "an" || w == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace endorhythm::data
