#include "endorhythm/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "endorhythm/bench.hpp"
#include "endorhythm/csv.hpp"
#include "endorhythm/dataset.hpp"
#include "endorhythm/error.hpp"
#include "endorhythm/lexi.hpp"
#include "endorhythm/prompt.hpp"
#include "endorhythm/report.hpp"
#include "endorhythm/rhythm.hpp"
#include "endorhythm/stats.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

// Thrown for argument combinations CLI11 cannot express; maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& item : str::split(s, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  out.flush();
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::vector<CycleSample> read_samples(const std::vector<std::string>& paths) {
  std::vector<CycleSample> all;
  for (const auto& p : paths) {
    auto in = open_in(p);
    auto samples = read_hormone_csv(in);
    all.insert(all.end(), samples.begin(), samples.end());
  }
  return all;
}

std::vector<PromptRecord> read_corpora(const std::vector<std::string>& paths) {
  std::vector<PromptRecord> all;
  for (const auto& p : paths) {
    auto in = open_in(p);
    auto records = read_corpus(in);
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  return all;
}

std::string f6(double v) { return fmt::format("{:.6f}", v); }

struct Context {
  GlobalConfig config;
  std::uint64_t seed = 0;
  std::ostream& out;
  std::ostream& err;
};

// gen-hormones

struct GenHormonesArgs {
  std::string cycle;
  int resolution = 0;
  double noise = 0.05;
  double wake_hour = 7.0;
  int cycle_length = 28;
  std::string out;
};

void cmd_gen_hormones(const GenHormonesArgs& a, Context& ctx) {
  CycleParams params;
  params.wake_hour = a.wake_hour;
  params.cycle_length_days = a.cycle_length;
  params.noise_sigma = a.noise;
  params.seed = ctx.seed;
  const CycleKind kind = parse_cycle_kind(a.cycle);
  int resolution = a.resolution;
  if (resolution <= 0) resolution = kind == CycleKind::Menstrual ? a.cycle_length : 24;
  const auto samples = sample_cycle(kind, resolution, params);
  if (a.out.empty() || a.out == "-") {
    write_hormone_csv(ctx.out, samples);
  } else {
    auto out = open_out(a.out);
    write_hormone_csv(out, samples);
  }
}

// gen-prompts

struct GenPromptsArgs {
  std::vector<std::string> hormones;
  std::string contexts;
  std::string bands;
  std::string elaborate_with;
  int workers = 4;
  std::string out;
};

std::vector<PromptRecord> elaborate_all(const std::vector<PromptRecord>& records, llm::Gateway& gen, int workers,
                                        std::ostream& err) {
  std::vector<PromptRecord> out(records.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) out[i] = elaborate_prompt(records[i], gen);
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  std::size_t failed = 0;
  for (const auto& r : out)
    if (!r.error.empty()) {
      ++failed;
      err << "warning: " << r.id << " kept its template text: " << r.error << '\n';
    }
  if (failed) err << fmt::format("warning: {} of {} prompts were not elaborated\n", failed, out.size());
  return out;
}

void cmd_gen_prompts(const GenPromptsArgs& a, Context& ctx) {
  const auto samples = read_samples(a.hormones);
  if (samples.empty()) throw ConfigError("hormone files contain no samples");

  fs::path contexts_path = a.contexts.empty() ? ctx.config.contexts : fs::path(a.contexts);
  const auto contexts = contexts_path.empty() ? default_contexts() : load_contexts(contexts_path);
  fs::path bands_path = a.bands.empty() ? ctx.config.bands : fs::path(a.bands);
  const auto bands = bands_path.empty() ? default_bands() : load_bands(bands_path);

  std::vector<PromptRecord> records;
  for (CycleKind kind : {CycleKind::Menstrual, CycleKind::Circadian}) {
    std::vector<CycleSample> subset;
    for (const auto& s : samples)
      if (s.point.kind == kind) subset.push_back(s);
    if (subset.empty()) continue;
    auto built = build_corpus(subset, contexts, bands, ctx.seed);
    records.insert(records.end(), built.begin(), built.end());
  }

  if (!a.elaborate_with.empty()) {
    auto it = ctx.config.providers.find(a.elaborate_with);
    if (it == ctx.config.providers.end()) throw ConfigError("unknown provider: " + a.elaborate_with);
    auto gen = make_gateway(it->second);
    records = elaborate_all(records, *gen, a.workers, ctx.err);
  }

  if (a.out.empty() || a.out == "-") {
    write_corpus(ctx.out, records);
  } else {
    auto out = open_out(a.out);
    write_corpus(out, records);
  }
}

// analyze

struct AnalyzeArgs {
  std::vector<std::string> corpora;
  std::vector<std::string> hormones;
  std::string out_dir;
  std::size_t keywords = 10;
  std::string femaleness;
  std::string resources;
};

constexpr std::array<const char*, 8> kMetricNames = {"happy", "sad", "fear", "anger", "surprise",
                                                     "sentiment", "avg_word_len", "femaleness"};

std::array<double, 8> metrics_of(const lexi::LexiReport& r) {
  return {r.emotions.share[0], r.emotions.share[1], r.emotions.share[2], r.emotions.share[3],
          r.emotions.share[4], r.sentiment,         r.avg_word_length,   r.femaleness};
}

void cmd_analyze(const AnalyzeArgs& a, Context& ctx) {
  auto records = read_corpora(a.corpora);
  if (records.empty()) throw ConfigError("corpus files contain no records");
  if (!a.hormones.empty()) attach_hormones(records, read_samples(a.hormones));

  const fs::path res_dir = !a.resources.empty()        ? fs::path(a.resources)
                           : !ctx.config.resources.empty() ? ctx.config.resources
                                                           : lexi::default_resource_dir();
  const auto res = lexi::Resources::load(res_dir);
  const std::string fem_mode = a.femaleness.empty() ? ctx.config.femaleness : a.femaleness;
  std::unique_ptr<lexi::FemalenessBackend> fem;
  if (fem_mode == "lexicon") {
    fem = std::make_unique<lexi::LexiconFemaleness>(
        lexi::LexiconFemaleness::load(res_dir / "female_coded.txt", res_dir / "male_coded.txt"));
  } else {
    fem = std::make_unique<lexi::RemoteFemaleness>(fem_mode);
  }

  std::vector<lexi::LexiReport> reports;
  reports.reserve(records.size());
  for (const auto& r : records) reports.push_back(lexi::analyze_text(r.text, res, *fem));

  const fs::path dir(a.out_dir);
  {
    std::string csv = "id,condition,phase,happy,sad,fear,anger,surprise,sentiment,avg_word_len,femaleness,tokens\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      const auto m = metrics_of(reports[i]);
      csv += csv::join({r.id, std::string(to_string(r.condition)),
                        r.phase ? std::string(to_string(*r.phase)) : std::string()});
      for (double v : m) csv += "," + f6(v);
      csv += fmt::format(",{}\n", reports[i].token_count);
    }
    write_text(dir / "lexi.csv", csv);
  }

  // Per (condition, phase) groups in canonical order.
  struct Group {
    Condition condition;
    Phase phase;
    std::vector<std::size_t> rows;
  };
  std::vector<Group> groups;
  for (Condition c : {Condition::Menstrual, Condition::Circadian}) {
    const auto& phases = c == Condition::Menstrual ? kMenstrualPhases : kCircadianPhases;
    for (Phase p : phases) {
      Group g{c, p, {}};
      for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].condition == c && records[i].phase == p) g.rows.push_back(i);
      if (!g.rows.empty()) groups.push_back(std::move(g));
    }
  }

  {
    std::string csv = "condition,phase,n";
    for (auto* m : kMetricNames) csv += std::string(",") + m;
    csv += "\n";
    for (const auto& g : groups) {
      std::array<double, 8> sum{};
      for (auto i : g.rows) {
        const auto m = metrics_of(reports[i]);
        for (std::size_t k = 0; k < m.size(); ++k) sum[k] += m[k];
      }
      csv += fmt::format("{},{},{}", to_string(g.condition), to_string(g.phase), g.rows.size());
      for (double s : sum) csv += "," + f6(s / static_cast<double>(g.rows.size()));
      csv += "\n";
    }
    write_text(dir / "phase_means.csv", csv);
  }

  std::vector<report::Comparison> tests;
  auto run = [&](stats::TestKind kind, std::string scope, auto&& fn) {
    report::Comparison c{kind, std::move(scope), std::nullopt, {}};
    try {
      c.result = fn();
    } catch (const std::exception& e) {
      c.note = e.what();
    }
    tests.push_back(std::move(c));
  };

  std::string kw_csv = "condition,phase,rank,term,score\n";
  for (Condition c : {Condition::Menstrual, Condition::Circadian}) {
    std::vector<const Group*> cg;
    for (const auto& g : groups)
      if (g.condition == c) cg.push_back(&g);
    if (cg.empty()) continue;
    const std::string cname(to_string(c));

    if (cg.size() >= 2) {
      std::vector<lexi::PhaseGroup> docs;
      for (const auto* g : cg) {
        lexi::PhaseGroup pg{std::string(to_string(g->phase)), {}};
        for (auto i : g->rows) pg.texts.push_back(records[i].text);
        docs.push_back(std::move(pg));
      }
      for (const auto& pk : lexi::tfidf_keywords(docs, a.keywords))
        for (std::size_t r = 0; r < pk.keywords.size(); ++r)
          kw_csv += fmt::format("{},{},{},{},{}\n", cname, pk.label, r + 1, pk.keywords[r].term,
                                f6(pk.keywords[r].score));
    }

    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      run(stats::TestKind::AnovaF, fmt::format("{}|{} across phases", cname, kMetricNames[m]), [&] {
        std::vector<std::vector<double>> samples;
        for (const auto* g : cg) {
          std::vector<double> v;
          for (auto i : g->rows) v.push_back(metrics_of(reports[i])[m]);
          samples.push_back(std::move(v));
        }
        return stats::one_way_anova(samples);
      });
    }

    bool have_hormones = false;
    for (const auto& r : records)
      if (r.condition == c && r.hormones) have_hormones = true;
    if (have_hormones) {
      for (Signal s : kAllSignals) {
        for (std::size_t m = 0; m < 5; ++m) {
          run(stats::TestKind::PearsonR, fmt::format("{}|{} vs {}", cname, to_string(s), kMetricNames[m]), [&] {
            std::vector<double> x, y;
            for (std::size_t i = 0; i < records.size(); ++i) {
              if (records[i].condition != c || !records[i].hormones) continue;
              x.push_back(records[i].hormones->get(s));
              y.push_back(metrics_of(reports[i])[m]);
            }
            return stats::pearson(x, y);
          });
        }
      }
    }
  }
  write_text(dir / "keywords.csv", kw_csv);

  auto lengths_of = [&](Condition c) {
    std::vector<double> v;
    for (const auto& r : records)
      if (r.condition == c)
        for (const auto& t : lexi::tokenize(r.text)) v.push_back(static_cast<double>(t.size()));
    return v;
  };
  const auto ml = lengths_of(Condition::Menstrual);
  const auto cl = lengths_of(Condition::Circadian);
  if (!ml.empty() && !cl.empty())
    run(stats::TestKind::KS2, "Menstrual vs Circadian|word_length", [&] { return stats::ks_two_sample(ml, cl); });

  write_text(dir / "stats.txt", report::summary_text(tests, ctx.seed));
  ctx.out << fmt::format("analyzed {} records into {}\n", records.size(), dir.string());
}

// bench

struct BenchArgs {
  std::string plan;
  std::vector<std::string> datasets;
  std::vector<std::string> models;
  std::string conditions;
  std::string judge;
  std::string out;
  std::vector<std::string> corpora;
  std::vector<std::string> hormones;
  int workers = 0;
  std::string squad_match;
  std::size_t stop_after = 0;
};

bench::DatasetSpec parse_dataset_arg(const std::string& arg, const fs::path& base) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) throw UsageError("--dataset expects kind=path[:limit], got " + arg);
  bench::DatasetSpec spec{data::parse_dataset_kind(str::trim(arg.substr(0, eq))), {}, 0};
  std::string rest = arg.substr(eq + 1);
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    if (auto limit = str::to_int<std::size_t>(rest.substr(colon + 1))) {
      spec.limit = *limit;
      rest.resize(colon);
    }
  }
  spec.path = resolve(base, std::string(str::trim(rest)));
  return spec;
}

void cmd_bench(BenchArgs a, bool seed_given, Context& ctx) {
  fs::path base;
  if (!a.plan.empty()) {
    pt::ptree tree;
    try {
      pt::read_ini(a.plan, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("cannot read plan: ") + e.what());
    }
    base = fs::path(a.plan).parent_path();
    const auto& p = tree.get_child("plan", tree);
    auto list = [&](const char* key) { return split_list(p.get<std::string>(key, "")); };
    if (a.datasets.empty()) a.datasets = list("datasets");
    if (a.models.empty()) a.models = list("models");
    if (a.corpora.empty())
      for (auto& c : list("corpus")) a.corpora.push_back(resolve(base, c).string());
    if (a.hormones.empty())
      for (auto& h : list("hormones")) a.hormones.push_back(resolve(base, h).string());
    if (a.conditions.empty()) a.conditions = p.get<std::string>("conditions", "");
    if (a.judge.empty()) a.judge = p.get<std::string>("judge", "");
    if (a.out.empty()) a.out = resolve(base, p.get<std::string>("out", "")).string();
    if (a.workers == 0) a.workers = p.get<int>("workers", 0);
    if (a.squad_match.empty()) a.squad_match = p.get<std::string>("squad_match", "");
    if (!seed_given && p.count("seed")) ctx.seed = p.get<std::uint64_t>("seed");
  }
  if (a.out.empty()) throw UsageError("bench needs --out (or out= in the plan file)");
  if (a.datasets.empty()) throw UsageError("bench needs at least one --dataset");
  if (a.models.empty()) throw UsageError("bench needs at least one --model");

  bench::RunPlan plan;
  for (const auto& d : a.datasets) plan.datasets.push_back(parse_dataset_arg(d, a.plan.empty() ? fs::path() : base));
  for (const auto& m : a.models) {
    auto it = ctx.config.providers.find(m);
    if (it == ctx.config.providers.end()) throw ConfigError("unknown provider: " + m);
    plan.models.push_back(make_gateway(it->second));
  }
  if (!a.conditions.empty()) {
    plan.conditions.clear();
    for (const auto& c : split_list(a.conditions)) plan.conditions.push_back(parse_condition(c));
  }
  if (!a.judge.empty() && !str::iequals(a.judge, "exact")) {
    auto it = ctx.config.providers.find(a.judge);
    if (it == ctx.config.providers.end()) throw ConfigError("unknown judge provider: " + a.judge);
    plan.judge = make_gateway(it->second);
  }
  if (!a.squad_match.empty()) {
    if (str::iequals(a.squad_match, "equals")) plan.squad_match = bench::SquadMatch::Equals;
    else if (str::iequals(a.squad_match, "contains")) plan.squad_match = bench::SquadMatch::Contains;
    else throw UsageError("--squad-match must be contains or equals");
  }

  auto records = read_corpora(a.corpora);
  if (!a.hormones.empty()) attach_hormones(records, read_samples(a.hormones));
  for (auto& r : records) {
    if (r.condition == Condition::Menstrual) plan.menstrual_corpus.push_back(std::move(r));
    else if (r.condition == Condition::Circadian) plan.circadian_corpus.push_back(std::move(r));
  }
  if (!ctx.config.baseline.empty()) plan.baseline_text = ctx.config.baseline;
  plan.seed = ctx.seed;
  plan.output_path = a.out;
  if (a.workers > 0) plan.workers = a.workers;
  if (a.stop_after > 0) plan.stop_after = a.stop_after;

  const auto summary = bench::run_benchmark(plan);
  ctx.out << fmt::format("# seed={}\n", ctx.seed);
  ctx.out << fmt::format("new_results={} skipped={} errors={}\n", summary.new_results, summary.skipped,
                         summary.errors);
  ctx.out << "condition,results,errors,mean_score\n";
  for (const auto& [cond, s] : summary.conditions)
    ctx.out << fmt::format("{},{},{},{}\n", to_string(cond), s.results, s.errors, f6(s.mean_score));
}

// report

struct ReportArgs {
  std::vector<std::string> results;
  std::string out_dir;
  std::string groupings = "phase,cortisol_quintile,estrogen_quintile,condition";
  bool per_model = false;
};

void cmd_report(const ReportArgs& a, bool seed_given, Context& ctx) {
  std::vector<bench::BenchResult> results;
  for (const auto& p : a.results) {
    auto r = bench::read_results(fs::path(p));
    results.insert(results.end(), r.begin(), r.end());
  }
  std::vector<report::Table> tables;
  for (const auto& name : split_list(a.groupings)) {
    auto g = report::parse_grouping(name);
    if (a.per_model) g.per_model = true;
    tables.push_back({g.name(), report::aggregate(results, g)});
  }
  const auto tests = report::compare_all(results);
  const auto files =
      report::emit_report(tables, tests, a.out_dir, seed_given ? std::optional<std::uint64_t>(ctx.seed) : std::nullopt);
  for (const auto& f : files) ctx.out << f.string() << '\n';
}

}  // namespace

GlobalConfig default_config() {
  GlobalConfig c;
  c.baseline = std::string(kBaselinePrompt);
  return c;
}

GlobalConfig load_config(const fs::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  const fs::path base = path.parent_path();
  GlobalConfig c = default_config();
  try {
    if (auto g = tree.get_child_optional("general")) {
      if (g->count("seed")) c.seed = g->get<std::uint64_t>("seed");
      c.baseline = g->get<std::string>("baseline", c.baseline);
      c.resources = resolve(base, g->get<std::string>("resources", ""));
      c.bands = resolve(base, g->get<std::string>("bands", ""));
      c.contexts = resolve(base, g->get<std::string>("contexts", ""));
      c.femaleness = g->get<std::string>("femaleness", c.femaleness);
    }
    for (const auto& [section, node] : tree) {
      if (!section.starts_with("provider.")) continue;
      ProviderEntry e;
      e.config.name = section.substr(9);
      e.kind = str::lower(node.get<std::string>("kind", "http"));
      if (e.kind != "http" && e.kind != "mock") throw ConfigError("provider kind must be http or mock");
      e.config.base_url = node.get<std::string>("base_url", "");
      e.config.model = node.get<std::string>("model", e.config.name);
      e.config.api_key_env = node.get<std::string>("api_key_env", "");
      e.config.max_concurrent = node.get<int>("max_concurrent", e.config.max_concurrent);
      // Scripted providers answer instantly; throttling them only slows tests down.
      e.config.requests_per_minute =
          node.get<int>("requests_per_minute", e.kind == "mock" ? 0 : e.config.requests_per_minute);
      e.config.timeout_seconds = node.get<double>("timeout_seconds", e.config.timeout_seconds);
      e.config.max_retries = node.get<int>("max_retries", e.config.max_retries);
      e.config.backoff_base_seconds = node.get<double>("backoff_base_seconds", e.config.backoff_base_seconds);
      e.script = resolve(base, node.get<std::string>("script", ""));
      if (e.kind == "http" && e.config.base_url.empty())
        throw ConfigError("provider " + e.config.name + " needs base_url");
      if (e.kind == "mock" && e.script.empty()) throw ConfigError("mock provider " + e.config.name + " needs script");
      e.config.validate();
      c.providers[e.config.name] = std::move(e);
    }
  } catch (const pt::ptree_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::shared_ptr<llm::Gateway> make_gateway(const ProviderEntry& entry) {
  if (entry.kind == "mock")
    return std::make_shared<llm::Gateway>(entry.config, llm::make_mock(llm::MockProvider::load_script(entry.script)));
  return llm::Gateway::http(entry.config);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hormone cycle simulation, prompt generation and LLM benchmarking", "endorhythm"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  std::string config_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (default: config, else 0)");

  GenHormonesArgs gh;
  auto* gen_h = app.add_subcommand("gen-hormones", "Simulate one hormone cycle and write a CSV");
  gen_h->add_option("--cycle", gh.cycle, "menstrual or circadian")->required();
  gen_h->add_option("--resolution", gh.resolution, "Number of samples (default: cycle length or 24)");
  gen_h->add_option("--noise", gh.noise, "Gaussian noise sigma")->capture_default_str();
  gen_h->add_option("--wake-hour", gh.wake_hour, "Wake time for the circadian curves")->capture_default_str();
  gen_h->add_option("--cycle-length", gh.cycle_length, "Menstrual cycle length in days")->capture_default_str();
  gen_h->add_option("--out", gh.out, "Output CSV (default: stdout)");

  GenPromptsArgs gp;
  auto* gen_p = app.add_subcommand("gen-prompts", "Render a prompt corpus from hormone CSVs");
  gen_p->add_option("--hormones", gp.hormones, "Hormone CSV (repeatable)")->required();
  gen_p->add_option("--contexts", gp.contexts, "Context list, one per line");
  gen_p->add_option("--bands", gp.bands, "Tone band INI file");
  gen_p->add_option("--elaborate-with", gp.elaborate_with, "Provider that rewrites each prompt");
  gen_p->add_option("--workers", gp.workers, "Concurrent elaboration requests")->capture_default_str();
  gen_p->add_option("--out", gp.out, "Output corpus (default: stdout)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Linguistic analysis of prompt corpora");
  analyze->add_option("--corpus", an.corpora, "Corpus file (repeatable)")->required();
  analyze->add_option("--hormones", an.hormones, "Hormone CSV for correlation tests (repeatable)");
  analyze->add_option("--out-dir", an.out_dir, "Directory for lexi.csv, keywords.csv, phase_means.csv, stats.txt")
      ->required();
  analyze->add_option("--keywords", an.keywords, "Keywords per phase")->capture_default_str();
  analyze->add_option("--femaleness", an.femaleness, "lexicon or classifier URL");
  analyze->add_option("--resources", an.resources, "Lexicon directory");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark models under the three prompt conditions");
  bench_cmd->add_option("--plan", bn.plan, "INI run plan")->check(CLI::ExistingFile);
  bench_cmd->add_option("--dataset", bn.datasets, "kind=path[:limit] (repeatable)");
  bench_cmd->add_option("--model", bn.models, "Provider name from the config (repeatable)");
  bench_cmd->add_option("--conditions", bn.conditions, "Comma list of menstrual,circadian,baseline");
  bench_cmd->add_option("--judge", bn.judge, "exact or a provider name");
  bench_cmd->add_option("--out", bn.out, "Result log (appended, resumable)");
  bench_cmd->add_option("--corpus", bn.corpora, "Prompt corpus (repeatable)");
  bench_cmd->add_option("--hormones", bn.hormones, "Hormone CSV matching the corpus (repeatable)");
  bench_cmd->add_option("--workers", bn.workers, "Concurrent requests");
  bench_cmd->add_option("--squad-match", bn.squad_match, "contains or equals");
  bench_cmd->add_option("--stop-after", bn.stop_after, "Stop after this many new results");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Aggregate a result log into tables, charts and tests");
  report_cmd->add_option("--results", rp.results, "Result log (repeatable)")->required();
  report_cmd->add_option("--out-dir", rp.out_dir, "Output directory")->required();
  report_cmd->add_option("--groupings", rp.groupings, "Comma list of groupings")->capture_default_str();
  report_cmd->add_flag("--per-model", rp.per_model, "Split every grouping by model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    Context ctx{config_path.empty() ? default_config() : load_config(config_path), 0, out, err};
    const bool seed_given = seed_opt->count() > 0;
    ctx.seed = seed_given ? seed : ctx.config.seed.value_or(0);
    const bool seed_known = seed_given || ctx.config.seed.has_value();

    if (*gen_h) cmd_gen_hormones(gh, ctx);
    else if (*gen_p) cmd_gen_prompts(gp, ctx);
    else if (*analyze) cmd_analyze(an, ctx);
    else if (*bench_cmd) cmd_bench(bn, seed_given, ctx);
    else if (*report_cmd) cmd_report(rp, seed_known, ctx);
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace endorhythm::cli
