#include "endorhythm/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "endorhythm/error.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm::report {

namespace {

using bench::BenchResult;

constexpr double kCorrectThreshold = 0.5;

std::vector<const BenchResult*> scored_sorted(const std::vector<BenchResult>& results) {
  std::vector<const BenchResult*> out;
  for (const auto& r : results)
    if (!r.error && r.score) out.push_back(&r);
  // Fixed order keeps floating-point sums identical however the log was written.
  std::sort(out.begin(), out.end(),
            [](const BenchResult* a, const BenchResult* b) { return bench::key_of(*a) < bench::key_of(*b); });
  return out;
}

// Sort rank of a group label within its grouping.
int group_rank(const std::string& group) {
  if (group == "Baseline") return 100;
  if (group.size() == 2 && group[0] == 'Q') return group[1] - '0';
  for (std::size_t i = 0; i < kMenstrualPhases.size(); ++i) {
    if (group == to_string(kMenstrualPhases[i])) return 10 + static_cast<int>(i);
    if (group == to_string(kCircadianPhases[i])) return 20 + static_cast<int>(i);
  }
  return 50;
}

std::string fmt_num(double v) { return fmt::format("{:.6f}", v); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw ConfigError("cannot write " + path.string());
}

}  // namespace

std::string Grouping::name() const {
  std::string base;
  switch (kind) {
    case GroupingKind::ByPhase: base = "phase"; break;
    case GroupingKind::ByHormoneQuintile: base = std::string(to_string(signal)) + "_quintile"; break;
    case GroupingKind::ByCondition: base = "condition"; break;
  }
  return per_model ? base + "_by_model" : base;
}

Grouping parse_grouping(std::string_view name) {
  std::string n = str::lower(str::trim(name));
  bool per_model = false;
  const std::string suffix = "_by_model";
  if (n.size() > suffix.size() && n.ends_with(suffix)) {
    per_model = true;
    n.resize(n.size() - suffix.size());
  }
  if (n == "phase") return Grouping::by_phase(per_model);
  if (n == "condition") return Grouping::by_condition(per_model);
  if (n.ends_with("_quintile")) return Grouping::by_quintile(parse_signal(n.substr(0, n.size() - 9)), per_model);
  throw DomainError("unknown grouping: " + std::string(name));
}

std::vector<AggregateCell> aggregate(const std::vector<BenchResult>& results, const Grouping& grouping) {
  const auto scored = scored_sorted(results);
  if (scored.empty()) throw DomainError("aggregate needs at least one scored result");

  std::vector<std::string> labels(scored.size());
  if (grouping.kind == GroupingKind::ByHormoneQuintile) {
    std::map<std::pair<std::string, Condition>, std::vector<std::size_t>> pools;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (scored[i]->hormones) pools[{scored[i]->dataset, scored[i]->condition}].push_back(i);
      else labels[i] = "Baseline";
    }
    for (const auto& [key, idx] : pools) {
      std::vector<double> values;
      for (auto i : idx) values.push_back(scored[i]->hormones->get(grouping.signal));
      const auto bins = quintile_bins(values);
      for (std::size_t j = 0; j < idx.size(); ++j) labels[idx[j]] = fmt::format("Q{}", bins[j]);
    }
  } else {
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const auto& r = *scored[i];
      if (grouping.kind == GroupingKind::ByCondition) labels[i] = std::string(to_string(r.condition));
      else labels[i] = r.phase ? std::string(to_string(*r.phase)) : "Baseline";
    }
  }

  using Key = std::tuple<std::string, int, int, std::string, std::string>;
  struct Acc {
    Condition condition;
    std::size_t n = 0;
    double sum = 0.0;
    std::size_t correct = 0;
  };
  std::map<Key, Acc> acc;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& r = *scored[i];
    const Key key{r.dataset, static_cast<int>(r.condition), group_rank(labels[i]), labels[i],
                  grouping.per_model ? r.model : std::string()};
    auto& a = acc.try_emplace(key, Acc{r.condition}).first->second;
    ++a.n;
    a.sum += *r.score;
    if (*r.score >= kCorrectThreshold) ++a.correct;
  }

  std::vector<AggregateCell> cells;
  for (const auto& [key, a] : acc) {
    AggregateCell c;
    c.dataset = std::get<0>(key);
    c.condition = a.condition;
    c.group = std::get<3>(key);
    c.model = std::get<4>(key);
    c.group_key = fmt::format("{}|{}|{}", c.dataset, to_string(c.condition), c.group);
    if (grouping.per_model) c.group_key += "|" + c.model;
    c.n = a.n;
    c.mean_score = a.sum / static_cast<double>(a.n);
    c.correct = a.correct;
    const auto ci = stats::wilson_interval(static_cast<long>(a.correct), static_cast<long>(a.n));
    c.wilson_lo = ci.lo;
    c.wilson_hi = ci.hi;
    cells.push_back(std::move(c));
  }
  return cells;
}

std::vector<Comparison> compare_conditions(const std::vector<BenchResult>& results, const std::string& dataset,
                                           const std::string& model) {
  std::map<Condition, std::vector<const BenchResult*>> by_cond;
  for (const auto* r : scored_sorted(results))
    if (r->dataset == dataset && r->model == model) by_cond[r->condition].push_back(r);
  if (by_cond[Condition::Baseline].empty())
    throw DomainError(fmt::format("no baseline results for {} / {}", dataset, model));

  auto scores_of = [](const std::vector<const BenchResult*>& rs) {
    std::vector<double> v;
    for (const auto* r : rs) v.push_back(*r->score);
    return v;
  };
  const auto baseline = scores_of(by_cond[Condition::Baseline]);

  std::vector<Comparison> out;
  auto run = [&](stats::TestKind kind, std::string scope, auto&& fn) {
    Comparison c{kind, fmt::format("{}|{}|{}", dataset, model, scope), std::nullopt, {}};
    try {
      c.result = fn();
    } catch (const std::exception& e) {
      c.note = e.what();
    }
    out.push_back(std::move(c));
  };

  for (Condition cond : {Condition::Menstrual, Condition::Circadian}) {
    const auto it = by_cond.find(cond);
    if (it == by_cond.end() || it->second.empty()) continue;
    const auto& rs = it->second;
    const auto scores = scores_of(rs);
    const std::string cname(to_string(cond));

    run(stats::TestKind::WelchT, cname + " vs Baseline", [&] { return stats::welch_t_test(scores, baseline); });

    run(stats::TestKind::AnovaF, cname + " across phases", [&] {
      std::map<Phase, std::vector<double>> groups;
      for (const auto* r : rs)
        if (r->phase) groups[*r->phase].push_back(*r->score);
      std::vector<std::vector<double>> g;
      for (auto& [phase, v] : groups) g.push_back(std::move(v));
      return stats::one_way_anova(g);
    });

    for (Signal s : kAllSignals) {
      run(stats::TestKind::PearsonR, fmt::format("{} {} vs score", cname, to_string(s)), [&] {
        std::vector<double> level;
        std::vector<double> score;
        for (const auto* r : rs) {
          if (!r->hormones) continue;
          level.push_back(r->hormones->get(s));
          score.push_back(*r->score);
        }
        return stats::pearson(level, score);
      });
    }
  }
  return out;
}

std::vector<Comparison> compare_all(const std::vector<BenchResult>& results) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& r : results)
    if (!r.error && r.condition == Condition::Baseline) pairs.insert({r.dataset, r.model});
  std::vector<Comparison> out;
  for (const auto& [dataset, model] : pairs) {
    auto c = compare_conditions(results, dataset, model);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

std::string cells_csv(const std::vector<AggregateCell>& cells) {
  std::string out = "group_key,n,mean_score,correct,wilson_lo,wilson_hi\n";
  for (const auto& c : cells) {
    out += fmt::format("{},{},{},{},{},{}\n", c.group_key, c.n, fmt_num(c.mean_score), c.correct,
                       fmt_num(c.wilson_lo), fmt_num(c.wilson_hi));
  }
  return out;
}

std::string summary_text(const std::vector<Comparison>& tests, std::optional<std::uint64_t> seed) {
  std::string out;
  if (seed) out += fmt::format("# seed={}\n", *seed);
  out += "kind,scope,statistic,df1,df2,p_value\n";
  std::size_t reported = 0;
  for (const auto& t : tests) {
    if (!t.result) continue;
    const auto& r = *t.result;
    out += fmt::format("{},{},{:.6g},{:.6g},{:.6g},{:.6g}\n", stats::to_string(t.kind), t.scope, r.statistic,
                       r.df1, r.df2, r.p_value);
    ++reported;
  }
  if (reported == 0) out += "no comparisons\n";
  for (const auto& t : tests)
    if (!t.result) out += fmt::format("# skipped {},{}: {}\n", stats::to_string(t.kind), t.scope, t.note);
  return out;
}

std::string chart_svg(const std::string& dataset, const std::vector<Table>& tables) {
  constexpr int kBar = 28, kGap = 8, kPlotH = 200, kTop = 40, kLeft = 50, kLabelH = 130, kPanelGap = 30;

  struct Panel {
    std::string title;
    std::vector<const AggregateCell*> cells;
  };
  std::vector<Panel> panels;
  for (const auto& t : tables) {
    Panel p{t.name, {}};
    for (const auto& c : t.cells)
      if (c.dataset == dataset) p.cells.push_back(&c);
    if (!p.cells.empty()) panels.push_back(std::move(p));
  }

  int width = kLeft + 20;
  for (const auto& p : panels) width = std::max<int>(width, kLeft + 20 + static_cast<int>(p.cells.size()) * (kBar + kGap));
  const int panel_h = kTop + kPlotH + kLabelH;
  const int height = std::max<int>(1, static_cast<int>(panels.size())) * (panel_h + kPanelGap);

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"10\">\n",
      width, height);
  svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);

  auto y_of = [&](int top, double v) { return top + kTop + (1.0 - std::clamp(v, 0.0, 1.0)) * kPlotH; };

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& p = panels[pi];
    const int top = static_cast<int>(pi) * (panel_h + kPanelGap);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\">{} - {}</text>\n", kLeft, top + 20,
                       xml_escape(dataset), xml_escape(p.title));
    for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double y = y_of(top, tick);
      svg += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", kLeft, y,
                         width - 10, y);
      svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.2f}</text>\n", kLeft - 4, y + 3, tick);
    }
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      const auto& c = *p.cells[i];
      const double x = kLeft + 10 + static_cast<double>(i) * (kBar + kGap);
      const double y = y_of(top, c.mean_score);
      const double base = y_of(top, 0.0);
      const char* fill = c.condition == Condition::Menstrual   ? "#c0504d"
                         : c.condition == Condition::Circadian ? "#4f81bd"
                                                               : "#9b9b9b";
      svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y,
                         kBar, base - y, fill);
      const double cx = x + kBar / 2.0;
      const double lo = y_of(top, c.wilson_lo), hi = y_of(top, c.wilson_hi);
      svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                         cx, lo, hi);
      for (double yy : {lo, hi})
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n",
                           cx - 5, yy, cx + 5, yy);
      std::string label = fmt::format("{} {}", to_string(c.condition), c.group);
      if (!c.model.empty()) label += " " + c.model;
      svg += fmt::format(
          "<text x=\"{0:.2f}\" y=\"{1:.2f}\" transform=\"rotate(60 {0:.2f} {1:.2f})\">{2} (n={3})</text>\n", cx - 4,
          base + 10, xml_escape(label), c.n);
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> emit_report(const std::vector<Table>& tables, const std::vector<Comparison>& tests,
                                               const std::filesystem::path& out_dir,
                                               std::optional<std::uint64_t> seed) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  std::set<std::string> datasets;
  for (const auto& t : tables) {
    const auto path = out_dir / (t.name + ".csv");
    write_file(path, cells_csv(t.cells));
    written.push_back(path);
    for (const auto& c : t.cells) datasets.insert(c.dataset);
  }
  for (const auto& d : datasets) {
    const auto path = out_dir / ("chart_" + d + ".svg");
    write_file(path, chart_svg(d, tables));
    written.push_back(path);
  }
  const auto summary = out_dir / "summary.txt";
  write_file(summary, summary_text(tests, seed));
  written.push_back(summary);
  return written;
}

}  // namespace endorhythm::report
