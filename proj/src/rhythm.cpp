#include "endorhythm/rhythm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "endorhythm/csv.hpp"
#include "endorhythm/error.hpp"
#include "endorhythm/random.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussian_bump(double x, double mu, double sigma) {
  const double d = x - mu;
  return std::exp(-d * d / (2.0 * sigma * sigma));
}

double circular_hour_distance(double a, double b) {
  const double x = std::fmod(std::abs(a - b), 24.0);
  return std::min(x, 24.0 - x);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Noise is keyed on (seed, kind, position) so a single profile call and a
// whole sampled cycle draw identical values for the same point.
void add_noise(HormoneState& s, CycleKind kind, double position, const CycleParams& params) {
  if (params.noise_sigma > 0.0) {
    const auto pos_key = static_cast<std::uint64_t>(std::llround(position * 1000.0));
    Rng rng = Rng::derive({params.seed, static_cast<std::uint64_t>(kind), pos_key});
    for (Signal sig : kAllSignals) {
      const double scale = sig == Signal::BodyTemp ? 0.1 : 1.0;
      s.set(sig, s.get(sig) + rng.normal() * params.noise_sigma * scale);
    }
  }
  for (Signal sig : kAllSignals) {
    if (sig != Signal::BodyTemp) s.set(sig, clamp01(s.get(sig)));
  }
  s.body_temp = std::clamp(s.body_temp, kBodyTempMin, kBodyTempMax);
}

}  // namespace

std::string_view to_string(CycleKind kind) {
  return kind == CycleKind::Menstrual ? "Menstrual" : "Circadian";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Menstrual: return "Menstrual";
    case Phase::Follicular: return "Follicular";
    case Phase::Ovulatory: return "Ovulatory";
    case Phase::Luteal: return "Luteal";
    case Phase::Morning: return "Morning";
    case Phase::Afternoon: return "Afternoon";
    case Phase::Evening: return "Evening";
    case Phase::Night: return "Night";
  }
  return "?";
}

std::string_view to_string(Signal signal) {
  switch (signal) {
    case Signal::Estrogen: return "estrogen";
    case Signal::Progesterone: return "progesterone";
    case Signal::Lh: return "lh";
    case Signal::Fsh: return "fsh";
    case Signal::Testosterone: return "testosterone";
    case Signal::Cortisol: return "cortisol";
    case Signal::BodyTemp: return "body_temp";
  }
  return "?";
}

CycleKind parse_cycle_kind(std::string_view name) {
  if (str::iequals(name, "menstrual")) return CycleKind::Menstrual;
  if (str::iequals(name, "circadian")) return CycleKind::Circadian;
  throw DomainError("unknown cycle kind: " + std::string(name));
}

Phase parse_phase(std::string_view name) {
  for (Phase p : kMenstrualPhases)
    if (str::iequals(name, to_string(p))) return p;
  for (Phase p : kCircadianPhases)
    if (str::iequals(name, to_string(p))) return p;
  throw DomainError("unknown phase: " + std::string(name));
}

Signal parse_signal(std::string_view name) {
  for (Signal s : kAllSignals)
    if (str::iequals(name, to_string(s))) return s;
  if (str::iequals(name, "bbt") || str::iequals(name, "temperature")) return Signal::BodyTemp;
  throw DomainError("unknown signal: " + std::string(name));
}

CycleKind family_of(Phase phase) {
  switch (phase) {
    case Phase::Menstrual:
    case Phase::Follicular:
    case Phase::Ovulatory:
    case Phase::Luteal: return CycleKind::Menstrual;
    default: return CycleKind::Circadian;
  }
}

double HormoneState::get(Signal s) const {
  switch (s) {
    case Signal::Estrogen: return estrogen;
    case Signal::Progesterone: return progesterone;
    case Signal::Lh: return lh;
    case Signal::Fsh: return fsh;
    case Signal::Testosterone: return testosterone;
    case Signal::Cortisol: return cortisol;
    case Signal::BodyTemp: return body_temp;
  }
  return 0.0;
}

void HormoneState::set(Signal s, double value) {
  switch (s) {
    case Signal::Estrogen: estrogen = value; break;
    case Signal::Progesterone: progesterone = value; break;
    case Signal::Lh: lh = value; break;
    case Signal::Fsh: fsh = value; break;
    case Signal::Testosterone: testosterone = value; break;
    case Signal::Cortisol: cortisol = value; break;
    case Signal::BodyTemp: body_temp = value; break;
  }
}

double HormoneState::normalized(Signal s) const {
  if (s == Signal::BodyTemp) return clamp01((body_temp - 36.2) / 0.8);
  return get(s);
}

void CycleParams::validate() const {
  if (!(wake_hour >= 0.0 && wake_hour < 24.0))
    throw DomainError("wake_hour must be in [0,24)");
  if (cycle_length_days < 21) throw DomainError("cycle_length_days must be >= 21");
  if (!(noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");
}

HormoneState circadian_profile(double hour, const CycleParams& params) {
  params.validate();
  if (!(hour >= 0.0 && hour < 24.0)) throw DomainError("hour of day must be in [0,24)");
  const double w = params.wake_hour;

  HormoneState s;
  const double dc = circular_hour_distance(hour, w + 0.5);
  s.cortisol = 0.2 + 0.8 * std::exp(-dc * dc / (2.0 * 3.0 * 3.0));
  const double dt = circular_hour_distance(hour, w - 0.5);
  s.testosterone = 0.3 + 0.7 * std::exp(-dt * dt / (2.0 * 3.5 * 3.5));
  s.body_temp = 36.65 - 0.25 * std::cos(kTwoPi * (hour - (w - 1.0)) / 24.0);
  s.estrogen = s.progesterone = s.lh = s.fsh = 0.5;

  add_noise(s, CycleKind::Circadian, hour, params);
  return s;
}

double canonical_day(double day, int cycle_length_days) {
  return day * 28.0 / static_cast<double>(cycle_length_days);
}

HormoneState menstrual_profile(double day, const CycleParams& params) {
  params.validate();
  if (!(day >= 1.0 && day <= params.cycle_length_days))
    throw DomainError(fmt::format("day of cycle must be in [1,{}]", params.cycle_length_days));
  const double d = canonical_day(day, params.cycle_length_days);

  HormoneState s;
  s.estrogen = clamp01(0.15 + 0.85 * gaussian_bump(d, 12, 1.8) + 0.45 * gaussian_bump(d, 21, 3.0));
  s.lh = 0.08 + 0.92 * gaussian_bump(d, 13, 0.7);
  s.fsh = clamp01(0.2 + 0.3 * gaussian_bump(d, 3, 3.0) + 0.5 * gaussian_bump(d, 13, 0.8));
  s.progesterone = 0.05 + 0.95 * gaussian_bump(d, 21, 2.5);
  s.testosterone = 0.4 + 0.3 * gaussian_bump(d, 13, 2.0);
  s.cortisol = 0.5 + 0.1 * std::cos(kTwoPi * (d - 2.0) / 28.0);
  s.body_temp = 36.4 + 0.4 / (1.0 + std::exp(-(d - 14.5) / 0.8));

  add_noise(s, CycleKind::Menstrual, day, params);
  return s;
}

Phase classify_menstrual_phase(double day, const PhaseBoundaries& b) {
  if (!(day >= 1.0 && day <= 28.0)) throw DomainError("canonical day must be in [1,28]");
  const double whole = std::floor(day);
  if (whole <= b.menstrual_last_day) return Phase::Menstrual;
  if (whole <= b.follicular_last_day) return Phase::Follicular;
  if (whole <= b.ovulatory_last_day) return Phase::Ovulatory;
  return Phase::Luteal;
}

Phase classify_circadian_phase(double hour, const PhaseBoundaries& b) {
  if (!(hour >= 0.0 && hour < 24.0)) throw DomainError("hour of day must be in [0,24)");
  if (hour >= b.night_start || hour < b.morning_start) return Phase::Night;
  if (hour < b.afternoon_start) return Phase::Morning;
  if (hour < b.evening_start) return Phase::Afternoon;
  return Phase::Evening;
}

Phase classify(const CyclePoint& point, const CycleParams& params, const PhaseBoundaries& bounds) {
  if (point.kind == CycleKind::Circadian) return classify_circadian_phase(point.position, bounds);
  const double d = canonical_day(point.position, params.cycle_length_days);
  return classify_menstrual_phase(std::clamp(d, 1.0, 28.0), bounds);
}

std::vector<CycleSample> sample_cycle(CycleKind kind, int resolution, const CycleParams& params,
                                      const PhaseBoundaries& bounds) {
  if (resolution < 1) throw DomainError("resolution must be >= 1");
  params.validate();
  std::vector<CycleSample> out;
  out.reserve(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    CyclePoint p{kind, 0.0};
    HormoneState h;
    if (kind == CycleKind::Circadian) {
      p.position = 24.0 * i / resolution;
      h = circadian_profile(p.position, params);
    } else {
      p.position = 1.0 + static_cast<double>(params.cycle_length_days) * i / resolution;
      h = menstrual_profile(p.position, params);
    }
    out.push_back({p, classify(p, params, bounds), h, params.seed});
  }
  return out;
}

std::vector<int> quintile_bins(std::span<const double> values) {
  if (values.empty()) throw DomainError("quintile_bins needs at least one value");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<int> bins(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Ranks i+1..j+1 share their mean; percentile at the rank midpoint.
    const double mean_rank = 0.5 * static_cast<double>(i + j + 2);
    const double pct = 100.0 * (mean_rank - 0.5) / static_cast<double>(n);
    const int bin = std::min(5, static_cast<int>(std::floor(pct / 20.0)) + 1);
    for (std::size_t k = i; k <= j; ++k) bins[order[k]] = bin;
    i = j + 1;
  }
  return bins;
}

void write_hormone_csv(std::ostream& out, std::span<const CycleSample> samples) {
  out << "cycle_kind,position,phase,estrogen,progesterone,lh,fsh,testosterone,cortisol,"
         "body_temp,seed\n";
  for (const auto& s : samples) {
    const auto& h = s.hormones;
    out << fmt::format("{},{:.2f},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n",
                       to_string(s.point.kind), s.point.position, to_string(s.phase), h.estrogen,
                       h.progesterone, h.lh, h.fsh, h.testosterone, h.cortisol, h.body_temp,
                       s.seed);
  }
}

std::vector<CycleSample> read_hormone_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->fields.size() != 11 || header->fields[0] != "cycle_kind")
    throw ParseError(1, "missing hormone CSV header");

  std::vector<CycleSample> out;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 11) throw ParseError(row->line, "expected 11 fields");
    CycleSample s{};
    try {
      s.point.kind = parse_cycle_kind(f[0]);
      s.phase = parse_phase(f[2]);
    } catch (const DomainError& e) {
      throw ParseError(row->line, e.what());
    }
    auto pos = str::to_double(f[1]);
    if (!pos) throw ParseError(row->line, "bad position");
    s.point.position = *pos;
    for (std::size_t k = 0; k < kAllSignals.size(); ++k) {
      auto v = str::to_double(f[3 + k]);
      if (!v) throw ParseError(row->line, "bad level for " + std::string(to_string(kAllSignals[k])));
      s.hormones.set(kAllSignals[k], *v);
    }
    auto seed = str::to_int<std::uint64_t>(f[10]);
    if (!seed) throw ParseError(row->line, "bad seed");
    s.seed = *seed;
    out.push_back(s);
  }
  return out;
}

}  // namespace endorhythm
