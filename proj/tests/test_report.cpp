#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "endorhythm/error.hpp"
#include "endorhythm/random.hpp"
#include "endorhythm/report.hpp"

using namespace endorhythm;
using namespace endorhythm::report;
using bench::BenchResult;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("endorhythm_report_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Wilson bounds as the two roots of |k/n - p| = z sqrt(p(1-p)/n), found by bisection.
std::pair<double, double> wilson_oracle(double k, double n, double z = 1.96) {
  const double phat = k / n;
  auto gap = [&](double p) { return std::abs(phat - p) - z * std::sqrt(p * (1 - p) / n); };
  boost::math::tools::eps_tolerance<double> tol(50);
  auto root = [&](double a, double b) {
    if (gap(a) * gap(b) > 0) return phat;
    const auto [lo, hi] = boost::math::tools::bisect(gap, a, b, tol);
    return (lo + hi) / 2;
  };
  // At phat = 0 or 1 the gap vanishes at the endpoint itself, so bracket just inside it.
  const double inner = 1e-9;
  return {phat == 0 ? 0.0 : root(0.0, std::min(phat, 1 - inner)), phat == 1 ? 1.0 : root(std::max(phat, inner), 1.0)};
}

BenchResult result(const std::string& item, Condition cond, double score, std::optional<Phase> phase = {},
                   std::optional<HormoneState> h = {}, const std::string& dataset = "ARC",
                   const std::string& model = "m") {
  BenchResult r;
  r.dataset = dataset;
  r.item_id = item;
  r.model = model;
  r.condition = cond;
  r.prompt_id = std::string(to_string(cond)) + "-" + item;
  r.phase = phase;
  r.hormones = h;
  r.score = score;
  r.timestamp = "t";
  return r;
}

HormoneState cortisol(double c) {
  HormoneState h;
  h.cortisol = c;
  return h;
}

// Mixed results across conditions, phases and datasets.
std::vector<BenchResult> random_results(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  const std::vector<std::string> datasets = {"ARC", "MMLU"};
  std::vector<BenchResult> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ds = datasets[rng.below(2)];
    const auto model = rng.below(2) ? "m1" : "m2";
    const double score = rng.below(3) == 0 ? rng.uniform01() : static_cast<double>(rng.below(2));
    HormoneState h;
    for (Signal s : kAllSignals) h.set(s, rng.uniform01());
    switch (rng.below(3)) {
      case 0:
        out.push_back(result("i" + std::to_string(i), Condition::Baseline, score, {}, {}, ds, model));
        break;
      case 1:
        out.push_back(result("i" + std::to_string(i), Condition::Menstrual, score,
                             kMenstrualPhases[rng.below(4)], h, ds, model));
        break;
      default:
        out.push_back(result("i" + std::to_string(i), Condition::Circadian, score,
                             kCircadianPhases[rng.below(4)], h, ds, model));
    }
  }
  return out;
}

std::vector<Grouping> all_groupings() {
  std::vector<Grouping> g;
  for (bool pm : {false, true}) {
    g.push_back(Grouping::by_phase(pm));
    g.push_back(Grouping::by_condition(pm));
    for (Signal s : kAllSignals) g.push_back(Grouping::by_quintile(s, pm));
  }
  return g;
}

const Comparison& find(const std::vector<Comparison>& cs, stats::TestKind kind, const std::string& suffix) {
  for (const auto& c : cs)
    if (c.kind == kind && c.scope.ends_with(suffix)) return c;
  throw std::runtime_error("no comparison " + suffix);
}

}  // namespace

TEST_CASE("three results in one cell") {
  const std::vector<BenchResult> rs = {result("a", Condition::Baseline, 1), result("b", Condition::Baseline, 0),
                                       result("c", Condition::Baseline, 1)};
  const auto cells = aggregate(rs, Grouping::by_condition());
  REQUIRE(cells.size() == 1);
  const auto& c = cells[0];
  CHECK(c.group_key == "ARC|Baseline|Baseline");
  CHECK(c.n == 3);
  CHECK(c.mean_score == doctest::Approx(2.0 / 3.0));
  CHECK(c.correct == 2);
  const auto [lo, hi] = wilson_oracle(2, 3);
  CHECK(c.wilson_lo == doctest::Approx(lo).epsilon(1e-9));
  CHECK(c.wilson_hi == doctest::Approx(hi).epsilon(1e-9));
  CHECK(c.wilson_lo == doctest::Approx(0.20765495512648796).epsilon(1e-12));
  CHECK(c.wilson_hi == doctest::Approx(0.9385096847238394).epsilon(1e-12));
}

TEST_CASE("circadian phases give four cells") {
  std::vector<BenchResult> rs;
  int i = 0;
  for (Phase p : kCircadianPhases)
    for (int k = 0; k < 3; ++k) rs.push_back(result("c" + std::to_string(i++), Condition::Circadian, k % 2, p, HormoneState{}));
  const auto cells = aggregate(rs, Grouping::by_phase());
  REQUIRE(cells.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(cells[k].group == to_string(kCircadianPhases[k]));
    CHECK(cells[k].n == 3);
  }
  rs.push_back(result("b", Condition::Baseline, 1));
  const auto with_base = aggregate(rs, Grouping::by_phase());
  CHECK(with_base.size() == 5);
  CHECK(with_base.back().group == "Baseline");
}

TEST_CASE("single perfect result") {
  const auto cells = aggregate({result("a", Condition::Baseline, 1.0)}, Grouping::by_condition());
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].mean_score == 1.0);
  CHECK(cells[0].wilson_hi == 1.0);
  CHECK(cells[0].wilson_lo == doctest::Approx(wilson_oracle(1, 1).first).epsilon(1e-9));
}

TEST_CASE("aggregation errors") {
  CHECK_THROWS_AS(aggregate({}, Grouping::by_phase()), DomainError);
  auto failed = result("a", Condition::Baseline, 1);
  failed.score.reset();
  failed.error = "boom";
  CHECK_THROWS_AS(aggregate({failed}, Grouping::by_phase()), DomainError);
}

TEST_CASE("cells respect wilson bounds and partitions sum to n") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto rs = random_results(seed, 150);
    for (const auto& g : all_groupings()) {
      std::size_t total = 0;
      for (const auto& c : aggregate(rs, g)) {
        total += c.n;
        CHECK(c.n >= 1);
        const double p = static_cast<double>(c.correct) / static_cast<double>(c.n);
        CHECK(c.wilson_lo <= p + 1e-12);
        CHECK(p <= c.wilson_hi + 1e-12);
        const auto [lo, hi] = wilson_oracle(static_cast<double>(c.correct), static_cast<double>(c.n));
        CHECK(c.wilson_lo == doctest::Approx(lo).epsilon(1e-9));
        CHECK(c.wilson_hi == doctest::Approx(hi).epsilon(1e-9));
      }
      CHECK(total == rs.size());
    }
  }
}

TEST_CASE("aggregation ignores result order") {
  auto rs = random_results(42, 200);
  std::map<std::string, std::string> base;
  for (const auto& g : all_groupings()) base[g.name()] = cells_csv(aggregate(rs, g));
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(rs);
    for (const auto& g : all_groupings()) CHECK(cells_csv(aggregate(rs, g)) == base[g.name()]);
  }
}

TEST_CASE("quintile cells") {
  std::vector<BenchResult> rs;
  for (int i = 0; i < 25; ++i)
    rs.push_back(result("q" + std::to_string(i), Condition::Circadian, i >= 10 && i < 15 ? 1 : 0,
                        Phase::Morning, cortisol(i / 25.0)));
  const auto cells = aggregate(rs, Grouping::by_quintile(Signal::Cortisol));
  REQUIRE(cells.size() == 5);
  for (int b = 0; b < 5; ++b) {
    CHECK(cells[b].group == "Q" + std::to_string(b + 1));
    CHECK(cells[b].n == 5);
    CHECK(cells[b].mean_score == (b == 2 ? 1.0 : 0.0));
  }
}

TEST_CASE("grouping names") {
  for (const auto& g : all_groupings()) {
    const auto back = parse_grouping(g.name());
    CHECK(back.name() == g.name());
  }
  CHECK(Grouping::by_quintile(Signal::Cortisol).name() == "cortisol_quintile");
  CHECK(Grouping::by_phase(true).name() == "phase_by_model");
  CHECK_THROWS_AS(parse_grouping("weekday"), DomainError);
}

TEST_CASE("identical hormonal and baseline scores") {
  std::vector<BenchResult> rs;
  const std::vector<double> scores = {0.2, 0.9, 0.4, 1.0, 0.0, 0.7};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    rs.push_back(result("b" + std::to_string(i), Condition::Baseline, scores[i]));
    rs.push_back(result("m" + std::to_string(i), Condition::Menstrual, scores[i], kMenstrualPhases[i % 4],
                        cortisol(0.1 * static_cast<double>(i))));
    rs.push_back(result("c" + std::to_string(i), Condition::Circadian, scores[i], kCircadianPhases[i % 4],
                        cortisol(0.1 * static_cast<double>(i))));
  }
  const auto cs = compare_conditions(rs, "ARC", "m");
  for (const auto& c : cs) {
    if (c.kind != stats::TestKind::WelchT) continue;
    REQUIRE(c.result.has_value());
    CHECK(c.result->statistic == doctest::Approx(0.0));
    CHECK(c.result->p_value == doctest::Approx(1.0));
  }
  CHECK(find(cs, stats::TestKind::WelchT, "Menstrual vs Baseline").result.has_value());
  CHECK(find(cs, stats::TestKind::WelchT, "Circadian vs Baseline").result.has_value());
}

TEST_CASE("score equal to cortisol gives r = 1") {
  std::vector<BenchResult> rs = {result("b0", Condition::Baseline, 1), result("b1", Condition::Baseline, 0)};
  Rng rng(9);
  for (int i = 0; i < 40; ++i) {
    const double c = rng.uniform01();
    HormoneState h = cortisol(c);
    h.estrogen = rng.uniform01();
    rs.push_back(result("c" + std::to_string(i), Condition::Circadian, c, kCircadianPhases[i % 4], h));
  }
  const auto cs = compare_conditions(rs, "ARC", "m");
  const auto& r = find(cs, stats::TestKind::PearsonR, "Circadian cortisol vs score");
  REQUIRE(r.result.has_value());
  CHECK(r.result->statistic == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.result->p_value < 1e-10);
  // Constant signals cannot be correlated and are noted instead.
  const auto& lh = find(cs, stats::TestKind::PearsonR, "Circadian lh vs score");
  CHECK_FALSE(lh.result.has_value());
  CHECK_FALSE(lh.note.empty());
}

TEST_CASE("equal phase distributions give F near zero") {
  std::vector<BenchResult> rs = {result("b0", Condition::Baseline, 1), result("b1", Condition::Baseline, 0)};
  const std::vector<double> scores = {0.0, 0.5, 1.0, 0.25};
  int i = 0;
  for (Phase p : kMenstrualPhases)
    for (double s : scores) rs.push_back(result("m" + std::to_string(i++), Condition::Menstrual, s, p, HormoneState{}));
  const auto& anova = find(compare_conditions(rs, "ARC", "m"), stats::TestKind::AnovaF, "Menstrual across phases");
  REQUIRE(anova.result.has_value());
  CHECK(anova.result->statistic == doctest::Approx(0.0));
  CHECK(anova.result->p_value == doctest::Approx(1.0));
}

TEST_CASE("comparisons need a baseline") {
  const std::vector<BenchResult> rs = {result("m", Condition::Menstrual, 1, Phase::Luteal, HormoneState{})};
  CHECK_THROWS_AS(compare_conditions(rs, "ARC", "m"), DomainError);
  CHECK(compare_all(rs).empty());
  CHECK(compare_all(random_results(5, 100)).size() > 0);
}

TEST_CASE("report files") {
  const auto dir = temp_dir("files");
  const auto rs = random_results(7, 120);
  const std::vector<Table> tables = {{"phase", aggregate(rs, Grouping::by_phase())},
                                     {"condition", aggregate(rs, Grouping::by_condition())}};
  const auto written = emit_report(tables, compare_all(rs), dir, 42);
  CHECK(written.size() >= 3);
  CHECK(fs::exists(dir / "phase.csv"));
  CHECK(fs::exists(dir / "condition.csv"));
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "chart_ARC.svg"));
  CHECK(slurp(dir / "summary.txt").starts_with("# seed=42\n"));
  const auto svg = slurp(dir / "chart_ARC.svg");
  CHECK(svg.starts_with("<svg"));
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("empty tests list") {
  const auto dir = temp_dir("empty");
  emit_report({{"condition", aggregate({result("a", Condition::Baseline, 1)}, Grouping::by_condition())}}, {}, dir);
  CHECK(slurp(dir / "summary.txt").find("no comparisons") != std::string::npos);
}

TEST_CASE("one chart per dataset") {
  const auto dir = temp_dir("datasets");
  std::vector<BenchResult> rs;
  for (const char* ds : {"ARC", "MMLU", "Hellaswag", "SQuAD"})
    for (int i = 0; i < 3; ++i) rs.push_back(result(std::string(ds) + std::to_string(i), Condition::Baseline, i % 2, {}, {}, ds));
  const auto written = emit_report({{"condition", aggregate(rs, Grouping::by_condition())}}, {}, dir);
  int svgs = 0;
  for (const auto& p : written) svgs += p.extension() == ".svg";
  CHECK(svgs == 4);
  for (const char* ds : {"ARC", "MMLU", "Hellaswag", "SQuAD"}) CHECK(fs::exists(dir / ("chart_" + std::string(ds) + ".svg")));
}

TEST_CASE("reports are byte-identical across reruns") {
  auto rs = random_results(11, 300);
  auto render = [&](const fs::path& dir) {
    std::vector<Table> tables;
    for (const auto& g : all_groupings()) tables.push_back({g.name(), aggregate(rs, g)});
    const auto written = emit_report(tables, compare_all(rs), dir, 1);
    std::map<std::string, std::string> files;
    for (const auto& p : written) files[p.filename().string()] = slurp(p);
    return files;
  };
  const auto a = render(temp_dir("rerun_a"));
  Rng(2).shuffle(rs);
  const auto b = render(temp_dir("rerun_b"));
  CHECK(a == b);
}

TEST_CASE("summary formatting") {
  std::vector<Comparison> cs = {{stats::TestKind::WelchT, "ARC|m|Menstrual vs Baseline",
                                 stats::TestResult{stats::TestKind::WelchT, -1.5, 10.2, 0, 0.16}, ""},
                                {stats::TestKind::PearsonR, "ARC|m|Menstrual lh vs score", std::nullopt, "constant"}};
  const auto text = summary_text(cs, std::nullopt);
  CHECK(text.starts_with("kind,scope,statistic,df1,df2,p_value\n"));
  CHECK(text.find("ARC|m|Menstrual vs Baseline,-1.5,10.2,0,0.16") != std::string::npos);
  CHECK(text.find("# skipped") != std::string::npos);
  CHECK(text.find("no comparisons") == std::string::npos);
}
