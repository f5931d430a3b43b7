#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace endorhythm {

enum class CycleKind { Menstrual, Circadian };

enum class Phase {
  Menstrual,
  Follicular,
  Ovulatory,
  Luteal,
  Morning,
  Afternoon,
  Evening,
  Night,
};

enum class Signal { Estrogen, Progesterone, Lh, Fsh, Testosterone, Cortisol, BodyTemp };

inline constexpr std::array<Signal, 7> kAllSignals = {
    Signal::Estrogen, Signal::Progesterone, Signal::Lh,      Signal::Fsh,
    Signal::Testosterone, Signal::Cortisol, Signal::BodyTemp};

inline constexpr std::array<Phase, 4> kMenstrualPhases = {Phase::Menstrual, Phase::Follicular,
                                                          Phase::Ovulatory, Phase::Luteal};
inline constexpr std::array<Phase, 4> kCircadianPhases = {Phase::Morning, Phase::Afternoon,
                                                          Phase::Evening, Phase::Night};

std::string_view to_string(CycleKind kind);
std::string_view to_string(Phase phase);
// Lower-case signal name as used in CSV headers and config ("lh", "body_temp").
std::string_view to_string(Signal signal);

// Case-insensitive; throw DomainError on unknown names.
CycleKind parse_cycle_kind(std::string_view name);
Phase parse_phase(std::string_view name);
Signal parse_signal(std::string_view name);

CycleKind family_of(Phase phase);

inline constexpr double kBodyTempMin = 35.5;
inline constexpr double kBodyTempMax = 38.0;

// Snapshot of the seven simulated signals. Levels are normalized to [0,1];
// body_temp is in degrees Celsius.
struct HormoneState {
  double estrogen = 0.5;
  double progesterone = 0.5;
  double lh = 0.5;
  double fsh = 0.5;
  double testosterone = 0.5;
  double cortisol = 0.5;
  double body_temp = 36.6;

  double get(Signal s) const;
  void set(Signal s, double value);

  // Value mapped onto [0,1]. body_temp uses the 36.2..37.0 C band, which
  // covers both the circadian and the biphasic menstrual range.
  double normalized(Signal s) const;

  bool operator==(const HormoneState&) const = default;
};

struct CyclePoint {
  CycleKind kind = CycleKind::Menstrual;
  // Day of cycle (Menstrual, 1-based) or hour of day (Circadian).
  double position = 1.0;

  bool operator==(const CyclePoint&) const = default;
};

// Phase boundaries. Menstrual values are the last day (inclusive, canonical
// 28-day scale) of each phase; circadian values are start hours.
struct PhaseBoundaries {
  double menstrual_last_day = 5;
  double follicular_last_day = 11;
  double ovulatory_last_day = 16;
  double morning_start = 5;
  double afternoon_start = 12;
  double evening_start = 17;
  double night_start = 21;
};

struct CycleParams {
  double wake_hour = 7.0;
  int cycle_length_days = 28;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;

  // Throws DomainError when an invariant is violated.
  void validate() const;
};

HormoneState circadian_profile(double hour, const CycleParams& params);
HormoneState menstrual_profile(double day, const CycleParams& params);

// Maps a day on the params' cycle length onto the canonical 28-day scale.
double canonical_day(double day, int cycle_length_days);

Phase classify_menstrual_phase(double canonical_day, const PhaseBoundaries& bounds = {});
Phase classify_circadian_phase(double hour, const PhaseBoundaries& bounds = {});

// Phase of a cycle point, rescaling menstrual days to the canonical cycle.
Phase classify(const CyclePoint& point, const CycleParams& params,
               const PhaseBoundaries& bounds = {});

struct CycleSample {
  CyclePoint point;
  Phase phase;
  HormoneState hormones;
  std::uint64_t seed;

  bool operator==(const CycleSample&) const = default;
};

// `resolution` evenly spaced points over one cycle, starting at day 1 or hour 0.
std::vector<CycleSample> sample_cycle(CycleKind kind, int resolution, const CycleParams& params,
                                      const PhaseBoundaries& bounds = {});

// Bins 1..5 by mean-rank percentile. Ties share their mean rank.
std::vector<int> quintile_bins(std::span<const double> values);

// Hormone sample CSV.
void write_hormone_csv(std::ostream& out, std::span<const CycleSample> samples);
std::vector<CycleSample> read_hormone_csv(std::istream& in);

}  // namespace endorhythm
