#include "endorhythm/bench.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "endorhythm/error.hpp"
#include "endorhythm/gateway.hpp"
#include "endorhythm/random.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm::bench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const std::vector<PromptRecord>& corpus_for(const RunPlan& plan, Condition c) {
  return c == Condition::Menstrual ? plan.menstrual_corpus : plan.circadian_corpus;
}

// std::hash is not stable across standard libraries; FNV-1a is.
std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(Scorer s) { return s == Scorer::Judge ? "Judge" : "ExactMatch"; }

ResultKey key_of(const BenchResult& r) {
  return {r.dataset, r.item_id, r.model, std::string(to_string(r.condition)), r.prompt_id};
}

std::string to_log_line(const BenchResult& r) {
  ordered_json j;
  j["dataset"] = r.dataset;
  j["item_id"] = r.item_id;
  j["model"] = r.model;
  j["condition"] = to_string(r.condition);
  j["prompt_id"] = r.prompt_id;
  j["cycle_position"] = r.cycle_position ? ordered_json(*r.cycle_position) : ordered_json(nullptr);
  j["phase"] = r.phase ? ordered_json(std::string(to_string(*r.phase))) : ordered_json(nullptr);
  if (r.hormones) {
    ordered_json h;
    for (Signal s : kAllSignals) h[std::string(to_string(s))] = r.hormones->get(s);
    j["hormones"] = std::move(h);
  } else {
    j["hormones"] = nullptr;
  }
  j["response_text"] = r.response_text;
  j["score"] = r.score ? ordered_json(*r.score) : ordered_json(nullptr);
  j["scorer"] = to_string(r.scorer);
  j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
  j["timestamp"] = r.timestamp;
  return j.dump();
}

BenchResult from_log_line(const std::string& line) {
  const json j = json::parse(line);
  BenchResult r;
  r.dataset = j.at("dataset").get<std::string>();
  r.item_id = j.at("item_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.condition = parse_condition(j.at("condition").get<std::string>());
  r.prompt_id = j.at("prompt_id").get<std::string>();
  if (!j.at("cycle_position").is_null()) r.cycle_position = j["cycle_position"].get<double>();
  if (!j.at("phase").is_null()) r.phase = parse_phase(j["phase"].get<std::string>());
  if (!j.at("hormones").is_null()) {
    HormoneState h;
    for (Signal s : kAllSignals) h.set(s, j["hormones"].at(std::string(to_string(s))).get<double>());
    r.hormones = h;
  }
  r.response_text = j.at("response_text").get<std::string>();
  if (!j.at("score").is_null()) r.score = j["score"].get<double>();
  r.scorer = j.at("scorer").get<std::string>() == "Judge" ? Scorer::Judge : Scorer::ExactMatch;
  if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  if (r.score.has_value() == r.error.has_value())
    throw ParseError(0, "result must carry exactly one of score and error");
  return r;
}

std::vector<BenchResult> read_results(std::istream& in) {
  std::vector<BenchResult> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (str::trim(line).empty()) continue;
    const bool last = in.eof();  // no trailing newline: possibly cut off mid-write
    try {
      out.push_back(from_log_line(line));
    } catch (const std::exception& e) {
      if (last) break;
      throw ParseError(lineno, std::string("bad result record: ") + e.what());
    }
  }
  return out;
}

std::vector<BenchResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open result log " + path.string());
  return read_results(in);
}

void RunPlan::validate() const {
  if (std::find(conditions.begin(), conditions.end(), Condition::Baseline) == conditions.end())
    throw ConfigError("the baseline condition is always required");
  if (models.empty()) throw ConfigError("run plan has no models");
  if (output_path.empty()) throw ConfigError("run plan has no output path");
  for (Condition c : conditions) {
    if (c == Condition::Baseline) continue;
    const auto& corpus = corpus_for(*this, c);
    if (corpus.empty()) throw ConfigError(fmt::format("{} corpus is empty", to_string(c)));
    for (const auto& r : corpus) {
      if (r.condition != c) throw ConfigError(fmt::format("record {} is not a {} prompt", r.id, to_string(c)));
      if (!r.hormones || !r.point || !r.phase)
        throw ConfigError("prompt " + r.id + " has no hormone snapshot");
    }
  }
}

const PromptRecord& assign_prompt(const std::vector<PromptRecord>& corpus, Condition condition,
                                  const std::string& dataset, std::size_t item_index,
                                  std::uint64_t seed) {
  std::vector<long long> positions;
  for (const auto& r : corpus) positions.push_back(std::llround(r.point->position * 100.0));
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());

  const std::size_t n_pos = positions.size();
  const std::size_t round = item_index / n_pos;
  const std::size_t slot = item_index % n_pos;
  const auto cond_key = static_cast<std::uint64_t>(condition);
  const auto ds_key = stable_hash(dataset);

  Rng perm_rng = Rng::derive({seed, cond_key, ds_key, round});
  perm_rng.shuffle(positions);
  const long long chosen = positions[slot];

  std::vector<const PromptRecord*> at_position;
  for (const auto& r : corpus)
    if (std::llround(r.point->position * 100.0) == chosen) at_position.push_back(&r);
  Rng pick = Rng::derive({seed, cond_key, ds_key, item_index, 0xC0FFEEULL});
  return *at_position[pick.below(at_position.size())];
}

std::string render_question(const data::BenchItem& item) {
  if (!item.multiple_choice()) {
    return item.question + "\n\nAnswer with a short phrase taken from the passage.";
  }
  std::string q = item.question + "\n";
  for (const auto& c : item.choices) q += fmt::format("\n{}. {}", c.label, c.text);
  q += "\n\nAnswer with the letter only.";
  return q;
}

double exact_match_score(const data::BenchItem& item, const std::string& response, SquadMatch mode) {
  if (item.multiple_choice()) {
    for (std::size_t i = 0; i < response.size(); ++i) {
      const char c = response[i];
      if (c < 'A' || c > 'E') continue;
      const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(response[i - 1]));
      const bool right_ok =
          i + 1 == response.size() || !std::isalnum(static_cast<unsigned char>(response[i + 1]));
      if (left_ok && right_ok) return std::string(1, c) == item.gold.front() ? 1.0 : 0.0;
    }
    return 0.0;
  }
  const auto norm = data::normalize_text_answer(response);
  for (const auto& g : item.gold) {
    const auto ng = data::normalize_text_answer(g);
    if (mode == SquadMatch::Equals ? norm == ng : (!ng.empty() && norm.find(ng) != std::string::npos))
      return 1.0;
  }
  return 0.0;
}

std::string judge_prompt(const data::BenchItem& item, const std::string& response) {
  std::string reference;
  if (item.multiple_choice()) {
    const auto& gold = item.gold.front();
    for (const auto& c : item.choices)
      if (c.label == gold) reference = fmt::format("{}. {}", c.label, c.text);
  } else {
    for (std::size_t i = 0; i < item.gold.size(); ++i) reference += (i ? " | " : "") + item.gold[i];
  }
  return fmt::format(
      "Grade the candidate response to the question below.\n\n"
      "Question:\n{}\n\n"
      "Reference answer:\n{}\n\n"
      "Candidate response:\n{}\n\n"
      "Judge correctness and relevance. Reply with a single decimal number between 0.0 and 1.0 "
      "and nothing else.",
      render_question(item), reference, response);
}

std::optional<double> parse_judge_score(const std::string& reply) {
  static const std::regex number(R"([-+]?(?:\d+(?:\.\d*)?|\.\d+))");
  std::smatch m;
  if (!std::regex_search(reply, m, number)) return std::nullopt;
  const auto v = str::to_double(m.str().front() == '+' ? m.str().substr(1) : m.str());
  if (!v) return std::nullopt;
  return std::clamp(*v, 0.0, 1.0);
}

double judge_score(const data::BenchItem& item, const std::string& response, llm::Gateway& judge) {
  const std::string system = "You are a strict and impartial grader of benchmark answers.";
  const std::string prompt = judge_prompt(item, response);
  try {
    for (int ask = 0; ask < 2; ++ask) {
      const auto reply = judge.chat(system, prompt, llm::kAnswerTemperature);
      if (auto score = parse_judge_score(reply.text)) return *score;
    }
  } catch (const ScoringError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScoringError(std::string("judge unavailable: ") + e.what());
  }
  throw ScoringError("judge reply contained no score");
}

RunSummary summarize(const std::vector<BenchResult>& results) {
  RunSummary s;
  std::map<Condition, double> totals;
  for (const auto& r : results) {
    auto& c = s.conditions[r.condition];
    ++c.results;
    if (r.error) {
      ++c.errors;
      ++s.errors;
    } else {
      totals[r.condition] += *r.score;
    }
  }
  for (auto& [cond, c] : s.conditions) {
    const auto scored = c.results - c.errors;
    c.mean_score = scored ? totals[cond] / static_cast<double>(scored) : 0.0;
  }
  return s;
}

RunSummary run_benchmark(const RunPlan& plan) {
  std::vector<data::BenchItem> items;
  for (const auto& ds : plan.datasets) {
    auto loaded = data::load_dataset(ds.kind, ds.path, ds.limit, plan.seed);
    items.insert(items.end(), std::make_move_iterator(loaded.begin()), std::make_move_iterator(loaded.end()));
  }
  return run_benchmark(plan, items);
}

RunSummary run_benchmark(const RunPlan& plan, const std::vector<data::BenchItem>& items) {
  plan.validate();

  std::vector<BenchResult> existing;
  std::set<ResultKey> done;
  if (std::filesystem::exists(plan.output_path)) {
    std::ifstream in(plan.output_path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // Drop a partial final record left by an interrupted writer.
    if (!content.empty() && content.back() != '\n') {
      const auto cut = content.find_last_of('\n');
      const auto keep = cut == std::string::npos ? 0 : cut + 1;
      std::filesystem::resize_file(plan.output_path, keep);
      content.resize(keep);
    }
    std::istringstream ss(content);
    existing = read_results(ss);
    for (const auto& r : existing) done.insert(key_of(r));
  }

  std::ofstream log(plan.output_path, std::ios::app | std::ios::binary);
  if (!log) throw ConfigError("cannot write result log " + plan.output_path.string());

  struct Task {
    const data::BenchItem* item;
    std::shared_ptr<llm::Gateway> model;
    Condition condition;
    const PromptRecord* prompt;
  };

  const PromptRecord baseline = baseline_record(plan.baseline_text);
  std::vector<Task> tasks;
  RunSummary summary;
  std::map<std::string, std::size_t> per_dataset_index;
  for (const auto& item : items) {
    const auto ds = std::string(data::to_string(item.dataset));
    const std::size_t index = per_dataset_index[ds]++;
    for (const auto& model : plan.models) {
      for (Condition c : plan.conditions) {
        const PromptRecord* prompt =
            c == Condition::Baseline ? &baseline
                                     : &assign_prompt(corpus_for(plan, c), c, ds, index, plan.seed);
        const ResultKey key{ds, item.item_id, model->config().name, std::string(to_string(c)), prompt->id};
        if (done.contains(key)) {
          ++summary.skipped;
          continue;
        }
        tasks.push_back({&item, model, c, prompt});
      }
    }
  }
  if (plan.stop_after && tasks.size() > *plan.stop_after) tasks.resize(*plan.stop_after);

  std::mutex write_mu;
  std::vector<BenchResult> fresh;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> write_failed{false};

  auto worker = [&] {
    while (!write_failed) {
      const std::size_t i = next++;
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      BenchResult r;
      r.dataset = std::string(data::to_string(t.item->dataset));
      r.item_id = t.item->item_id;
      r.model = t.model->config().name;
      r.condition = t.condition;
      r.prompt_id = t.prompt->id;
      if (t.prompt->point) r.cycle_position = std::round(t.prompt->point->position * 100.0) / 100.0;
      r.phase = t.prompt->phase;
      r.hormones = t.prompt->hormones;
      r.scorer = plan.judge ? Scorer::Judge : Scorer::ExactMatch;
      try {
        r.response_text = t.model->chat(t.prompt->text, render_question(*t.item), llm::kAnswerTemperature,
                                        plan.seed).text;
        r.score = plan.judge ? judge_score(*t.item, r.response_text, *plan.judge)
                             : exact_match_score(*t.item, r.response_text, plan.squad_match);
      } catch (const std::exception& e) {
        r.score.reset();
        r.error = e.what();
      }
      r.timestamp = utc_timestamp();

      std::lock_guard lock(write_mu);
      log << to_log_line(r) << '\n';
      log.flush();
      if (!log) {
        write_failed = true;
        return;
      }
      fresh.push_back(std::move(r));
    }
  };

  const int n_workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (write_failed) throw ConfigError("failed writing result log " + plan.output_path.string());

  existing.insert(existing.end(), fresh.begin(), fresh.end());
  RunSummary totals = summarize(existing);
  totals.new_results = fresh.size();
  totals.skipped = summary.skipped;
  return totals;
}

}  // namespace endorhythm::bench
