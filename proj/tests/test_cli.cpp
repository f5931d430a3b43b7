#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "endorhythm/bench.hpp"
#include "endorhythm/cli.hpp"
#include "endorhythm/csv.hpp"
#include "endorhythm/error.hpp"
#include "endorhythm/prompt.hpp"
#include "endorhythm/strings.hpp"

using namespace endorhythm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "endorhythm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("endorhythm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// First data row of a CSV whose first two columns match.
std::vector<std::string> csv_row(const std::string& text, const std::string& a, const std::string& b) {
  std::istringstream in(text);
  csv::Reader reader(in);
  while (auto row = reader.next())
    if (row->fields.size() > 2 && row->fields[0] == a && row->fields[1] == b) return row->fields;
  return {};
}

std::vector<std::string> csv_header(const std::string& text) {
  std::istringstream in(text);
  csv::Reader reader(in);
  return reader.next()->fields;
}

}  // namespace

TEST_CASE("gen-hormones writes one row per sample") {
  const auto r = invoke({"gen-hormones", "--cycle", "menstrual", "--resolution", "28", "--seed", "42"});
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 29);
  std::istringstream in(r.out);
  const auto samples = read_hormone_csv(in);
  REQUIRE(samples.size() == 28);
  CHECK(samples[0].seed != 0);
  const auto again = invoke({"gen-hormones", "--cycle", "menstrual", "--resolution", "28", "--seed", "42"});
  CHECK(again.out == r.out);
  const auto circ = invoke({"gen-hormones", "--cycle", "circadian", "--seed", "42"});
  CHECK(count_lines(circ.out) == 25);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"gen-hormones"}).code == 1);
  CHECK(invoke({"gen-hormones", "--cycle", "menstrual", "--bogus"}).code == 1);
  const auto no_out = invoke({"bench", "--dataset", "arc=x.jsonl", "--model", "m"});
  CHECK(no_out.code == 1);
  CHECK(no_out.err.find("--out") != std::string::npos);
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("gen-hormones") != std::string::npos);
}

TEST_CASE("runtime errors exit with 2") {
  CHECK(invoke({"gen-hormones", "--cycle", "lunar"}).code == 2);
  const auto dir = temp_dir("runtime");
  CHECK(invoke({"analyze", "--corpus", (dir / "missing.jsonl").string(), "--out-dir", dir.string()}).code == 2);
}

TEST_CASE("analyze finds the sad menstrual phase") {
  const auto dir = temp_dir("analyze");
  // Menstrual phase texts carry the most sadness words.
  const std::map<Phase, std::string> fill = {
      {Phase::Menstrual, "alone cry bitter cold tired slow"},
      {Phase::Follicular, "alone table window river slow tired"},
      {Phase::Ovulatory, "bright alive table window river slow"},
      {Phase::Luteal, "cold table window river slow tired"}};
  std::vector<PromptRecord> records;
  int n = 0;
  for (const auto& [phase, text] : fill) {
    for (int k = 0; k < 6; ++k) {
      PromptRecord r;
      r.condition = Condition::Menstrual;
      r.phase = phase;
      r.point = CyclePoint{CycleKind::Menstrual, 1.0 + n};
      r.id = "menstrual-" + std::to_string(n++);
      r.text = text + (k % 2 ? " window" : " river river");
      records.push_back(r);
    }
  }
  {
    std::ofstream out(dir / "corpus.jsonl");
    write_corpus(out, records);
  }
  const auto r = invoke({"analyze", "--corpus", (dir / "corpus.jsonl").string(), "--out-dir", (dir / "out").string(),
                      "--resources", RESOURCE_DIR, "--seed", "42"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"lexi.csv", "keywords.csv", "phase_means.csv", "stats.txt"}) CHECK(fs::exists(dir / "out" / f));

  const auto means = slurp(dir / "out" / "phase_means.csv");
  const auto header = csv_header(means);
  const auto sad_col = std::find(header.begin(), header.end(), "sad") - header.begin();
  double best = -1;
  std::string best_phase;
  for (Phase p : kMenstrualPhases) {
    const auto row = csv_row(means, "Menstrual", std::string(to_string(p)));
    REQUIRE(row.size() == header.size());
    const double v = std::stod(row[sad_col]);
    if (v > best) best = v, best_phase = row[1];
  }
  CHECK(best_phase == "Menstrual");

  const auto stats_txt = slurp(dir / "out" / "stats.txt");
  CHECK(stats_txt.starts_with("# seed=42\n"));
  std::istringstream lines(stats_txt);
  std::string line;
  bool found = false;
  while (std::getline(lines, line)) {
    if (line.find("Menstrual|sad across phases") == std::string::npos) continue;
    const auto fields = str::split(line, ',');
    CHECK(std::stod(fields[2]) > 0);
    found = true;
  }
  CHECK(found);
  CHECK(count_lines(slurp(dir / "out" / "lexi.csv")) == records.size() + 1);
}

TEST_CASE("config loading") {
  const auto dir = temp_dir("config");
  spit(dir / "replies.tsv", "*\treply:A\n");
  spit(dir / "endorhythm.ini",
       "[general]\nseed = 17\nbaseline = Be helpful.\n\n"
       "[provider.fake]\nkind = mock\nscript = replies.tsv\n\n"
       "[provider.remote]\nbase_url = https://example.invalid/v1\nmodel = big\napi_key_env = SOME_KEY\n"
       "max_concurrent = 2\nrequests_per_minute = 30\n");
  const auto c = cli::load_config(dir / "endorhythm.ini");
  CHECK(c.seed == 17u);
  CHECK(c.baseline == "Be helpful.");
  REQUIRE(c.providers.count("fake"));
  CHECK(c.providers.at("fake").kind == "mock");
  CHECK(c.providers.at("fake").script == dir / "replies.tsv");
  CHECK(c.providers.at("fake").config.requests_per_minute == 0);
  const auto& remote = c.providers.at("remote");
  CHECK(remote.kind == "http");
  CHECK(remote.config.model == "big");
  CHECK(remote.config.api_key_env == "SOME_KEY");
  CHECK(remote.config.max_concurrent == 2);
  CHECK(remote.config.requests_per_minute == 30);
  CHECK(cli::make_gateway(c.providers.at("fake"))->chat("s", "q").text == "A");

  spit(dir / "bad.ini", "[provider.x]\nkind = carrier_pigeon\n");
  CHECK_THROWS_AS(cli::load_config(dir / "bad.ini"), ConfigError);
  CHECK(cli::default_config().femaleness == "lexicon");
}

TEST_CASE("full pipeline with a mock provider") {
  const auto dir = temp_dir("pipeline");
  spit(dir / "replies.tsv", "*\treply:The answer is A\n");
  spit(dir / "cfg.ini", "[general]\nseed = 5\n\n[provider.fake]\nkind = mock\nscript = replies.tsv\n");
  const std::string cfg = (dir / "cfg.ini").string();
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", cfg});
    const auto r = invoke(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return r;
  };
  run({"gen-hormones", "--cycle", "menstrual", "--out", (dir / "m.csv").string()});
  run({"gen-hormones", "--cycle", "circadian", "--out", (dir / "c.csv").string()});
  run({"gen-prompts", "--hormones", (dir / "m.csv").string(), "--hormones", (dir / "c.csv").string(), "--out",
       (dir / "corpus.jsonl").string()});
  const auto arc = std::string(FIXTURE_DIR) + "/arc_valid.jsonl";
  const auto bench = run({"bench", "--dataset", "arc=" + arc, "--model", "fake", "--corpus",
                          (dir / "corpus.jsonl").string(), "--hormones", (dir / "m.csv").string(), "--hormones",
                          (dir / "c.csv").string(), "--out", (dir / "results.log").string()});
  CHECK(bench.out.starts_with("# seed=5\n"));
  CHECK(bench.out.find("new_results=18") != std::string::npos);
  const auto results = bench::read_results(dir / "results.log");
  CHECK(results.size() == 18);
  for (const auto& r : results) {
    CHECK(r.score.has_value());
    if (r.condition != Condition::Baseline) CHECK(r.hormones.has_value());
  }
  const auto rerun = run({"bench", "--dataset", "arc=" + arc, "--model", "fake", "--corpus",
                          (dir / "corpus.jsonl").string(), "--hormones", (dir / "m.csv").string(), "--hormones",
                          (dir / "c.csv").string(), "--out", (dir / "results.log").string()});
  CHECK(rerun.out.find("new_results=0") != std::string::npos);

  run({"report", "--results", (dir / "results.log").string(), "--out-dir", (dir / "report").string()});
  for (const char* f : {"phase.csv", "cortisol_quintile.csv", "estrogen_quintile.csv", "condition.csv",
                        "summary.txt", "chart_ARC.svg"})
    CHECK(fs::exists(dir / "report" / f));
  CHECK(slurp(dir / "report" / "summary.txt").starts_with("# seed=5\n"));
}

TEST_CASE("bench plan file") {
  const auto dir = temp_dir("plan");
  spit(dir / "replies.tsv", "*\treply:B\n");
  spit(dir / "cfg.ini", "[provider.fake]\nkind = mock\nscript = replies.tsv\n");
  spit(dir / "plan.ini", "[plan]\ndatasets = mmlu=" + std::string(FIXTURE_DIR) + "/mmlu_valid.csv:3\n" +
                             "models = fake\nconditions = baseline\nout = " + (dir / "r.log").string() + "\nseed = 9\n");
  const auto r = invoke({"--config", (dir / "cfg.ini").string(), "bench", "--plan", (dir / "plan.ini").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.starts_with("# seed=9\n"));
  CHECK(bench::read_results(dir / "r.log").size() == 3);
}
