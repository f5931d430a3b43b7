#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "endorhythm/error.hpp"
#include "endorhythm/random.hpp"
#include "endorhythm/rhythm.hpp"

using namespace endorhythm;

namespace {

CycleParams quiet(double wake = 7.0) {
  CycleParams p;
  p.wake_hour = wake;
  p.noise_sigma = 0.0;
  return p;
}

// Position of the maximum of f over [lo, hi) on a 0.01 grid. A flat top
// reports its midpoint.
template <typename F>
double grid_argmax(F f, double lo, double hi) {
  double best = -1e300;
  int first = 0, last = 0;
  const int steps = static_cast<int>(std::lround((hi - lo) / 0.01));
  for (int i = 0; i <= steps; ++i) {
    const double v = f(lo + 0.01 * i);
    if (v > best) {
      best = v;
      first = last = i;
    } else if (v == best && last == i - 1) {
      last = i;
    }
  }
  return lo + 0.01 * (first + last) / 2.0;
}

}  // namespace

TEST_CASE("circadian closed forms") {
  const auto p = quiet();
  CHECK(circadian_profile(7.5, p).cortisol == doctest::Approx(1.0).epsilon(1e-12));
  // 0.2 + 0.8 exp(-144/18)
  CHECK(circadian_profile(19.5, p).cortisol == doctest::Approx(0.2 + 0.8 * std::exp(-8.0)).epsilon(1e-12));
  CHECK(circadian_profile(19.5, p).cortisol == doctest::Approx(0.200268370102322).epsilon(1e-12));
  CHECK(circadian_profile(6.0, p).body_temp == doctest::Approx(36.40).epsilon(1e-12));
  const auto s = circadian_profile(3.0, p);
  CHECK(s.estrogen == 0.5);
  CHECK(s.progesterone == 0.5);
  CHECK(s.lh == 0.5);
  CHECK(s.fsh == 0.5);
}

TEST_CASE("circadian distance wraps around midnight") {
  const auto p = quiet(1.0);  // cortisol peak at 1.5, testosterone peak at 0.5
  CHECK(circadian_profile(23.5, p).cortisol == doctest::Approx(0.2 + 0.8 * std::exp(-4.0 / 18.0)));
  CHECK(circadian_profile(0.5, p).testosterone == doctest::Approx(1.0));
}

TEST_CASE("menstrual closed forms") {
  const auto p = quiet();
  CHECK(menstrual_profile(13, p).lh == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(menstrual_profile(21, p).progesterone == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(menstrual_profile(1, p).progesterone == doctest::Approx(0.05 + 0.95 * std::exp(-400.0 / 12.5)));
  CHECK(menstrual_profile(1, p).progesterone == doctest::Approx(0.050000000000012035).epsilon(1e-12));
  CHECK(menstrual_profile(2, p).cortisol == doctest::Approx(0.6));
  CHECK(menstrual_profile(14.5, p).body_temp == doctest::Approx(36.6));
}

TEST_CASE("menstrual cycle length rescales onto 28 days") {
  auto p = quiet();
  p.cycle_length_days = 35;
  // Day 35 * 28/35 = 28 on the canonical scale; day 26.25 -> 21.
  CHECK(menstrual_profile(26.25, p).progesterone == doctest::Approx(1.0));
  CHECK(classify({CycleKind::Menstrual, 35.0}, p) == Phase::Luteal);
  CHECK(classify({CycleKind::Menstrual, 1.0}, p) == Phase::Menstrual);
}

TEST_CASE("profile domain errors") {
  const auto p = quiet();
  CHECK_THROWS_AS(circadian_profile(24.0, p), DomainError);
  CHECK_THROWS_AS(circadian_profile(-0.1, p), DomainError);
  CHECK_THROWS_AS(menstrual_profile(0.5, p), DomainError);
  CHECK_THROWS_AS(menstrual_profile(28.5, p), DomainError);
  CycleParams bad;
  bad.cycle_length_days = 20;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.noise_sigma = -1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("curve geometry on a 0.01 grid") {
  for (double w : {7.0, 6.0, 9.5}) {
    const auto p = quiet(w);
    auto wrap = [](double h) { return std::fmod(h + 24.0, 24.0); };
    CHECK(std::abs(grid_argmax([&](double t) { return circadian_profile(t, p).cortisol; }, 0, 23.99) -
                   wrap(w + 0.5)) <= 0.01);
    CHECK(std::abs(grid_argmax([&](double t) { return circadian_profile(t, p).testosterone; }, 0, 23.99) -
                   wrap(w - 0.5)) <= 0.01);
    CHECK(std::abs(grid_argmax([&](double t) { return -circadian_profile(t, p).body_temp; }, 0, 23.99) -
                   wrap(w - 1.0)) <= 0.01);
    CHECK(std::abs(grid_argmax([&](double t) { return circadian_profile(t, p).body_temp; }, 0, 23.99) -
                   wrap(w + 11.0)) <= 0.01);
  }
  const auto p = quiet();
  CHECK(std::abs(grid_argmax([&](double d) { return menstrual_profile(d, p).lh; }, 1, 28) - 13.0) <= 0.01);
  CHECK(std::abs(grid_argmax([&](double d) { return menstrual_profile(d, p).progesterone; }, 1, 28) - 21.0) <=
        0.01);
  const double estrogen_peak = grid_argmax([&](double d) { return menstrual_profile(d, p).estrogen; }, 1, 28);
  CHECK(std::abs(estrogen_peak - 12.0) <= 0.05);

  // The luteal shoulder lifts the follicular bump past 1, so the clamped top
  // is a plateau; its edges solve the unclamped curve = 1.
  auto above_one = [](double d) {
    auto g = [](double x, double mu, double s) { return std::exp(-(x - mu) * (x - mu) / (2 * s * s)); };
    return 0.15 + 0.85 * g(d, 12, 1.8) + 0.45 * g(d, 21, 3.0) - 1.0;
  };
  boost::math::tools::eps_tolerance<double> tol(50);
  const auto left = boost::math::tools::bisect(above_one, 10.0, 12.0, tol);
  const auto right = boost::math::tools::bisect(above_one, 12.0, 14.0, tol);
  const double plateau_mid = (left.first + right.first) / 2;
  CHECK(std::abs(estrogen_peak - plateau_mid) <= 0.01);
}

TEST_CASE("menstrual body temperature is a monotone biphasic shift") {
  const auto p = quiet();
  double prev = menstrual_profile(1, p).body_temp;
  for (int i = 1; i <= 2700; ++i) {
    const double t = menstrual_profile(1 + 0.01 * i, p).body_temp;
    REQUIRE(t >= prev);
    prev = t;
  }
  const double rise = menstrual_profile(28, p).body_temp - menstrual_profile(1, p).body_temp;
  CHECK(std::abs(rise - 0.4) <= 0.005);
}

TEST_CASE("noisy outputs stay inside the type invariants") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    CycleParams p;
    p.seed = seed;
    p.noise_sigma = 0.5;
    for (int i = 0; i < 12; ++i) {
      for (const auto& s : {circadian_profile(i * 1.99, p), menstrual_profile(1 + i * 2.25, p)}) {
        for (Signal sig : kAllSignals) {
          if (sig == Signal::BodyTemp) {
            REQUIRE(s.body_temp >= kBodyTempMin);
            REQUIRE(s.body_temp <= kBodyTempMax);
          } else {
            REQUIRE(s.get(sig) >= 0.0);
            REQUIRE(s.get(sig) <= 1.0);
          }
        }
      }
    }
  }
}

TEST_CASE("noise is seeded and reproducible") {
  CycleParams a;
  a.seed = 42;
  CycleParams b = a;
  b.seed = 43;
  CHECK(circadian_profile(8.0, a) == circadian_profile(8.0, a));
  CHECK_FALSE(circadian_profile(8.0, a) == circadian_profile(8.0, b));
  CHECK_FALSE(circadian_profile(8.0, a) == circadian_profile(8.0, quiet()));
}

TEST_CASE("menstrual phase classification") {
  CHECK(classify_menstrual_phase(1) == Phase::Menstrual);
  CHECK(classify_menstrual_phase(5) == Phase::Menstrual);
  CHECK(classify_menstrual_phase(5.99) == Phase::Menstrual);
  CHECK(classify_menstrual_phase(6) == Phase::Follicular);
  CHECK(classify_menstrual_phase(11) == Phase::Follicular);
  CHECK(classify_menstrual_phase(12) == Phase::Ovulatory);
  CHECK(classify_menstrual_phase(14) == Phase::Ovulatory);
  CHECK(classify_menstrual_phase(16) == Phase::Ovulatory);
  CHECK(classify_menstrual_phase(17) == Phase::Luteal);
  CHECK(classify_menstrual_phase(28) == Phase::Luteal);
  CHECK_THROWS_AS(classify_menstrual_phase(0.5), DomainError);
  CHECK_THROWS_AS(classify_menstrual_phase(28.5), DomainError);
}

TEST_CASE("circadian phase classification") {
  CHECK(classify_circadian_phase(8.0) == Phase::Morning);
  CHECK(classify_circadian_phase(12.0) == Phase::Afternoon);
  CHECK(classify_circadian_phase(23.0) == Phase::Night);
  CHECK(classify_circadian_phase(4.99) == Phase::Night);
  CHECK(classify_circadian_phase(0.0) == Phase::Night);
  CHECK(classify_circadian_phase(5.0) == Phase::Morning);
  CHECK(classify_circadian_phase(17.0) == Phase::Evening);
  CHECK(classify_circadian_phase(21.0) == Phase::Night);
  CHECK_THROWS_AS(classify_circadian_phase(24.0), DomainError);
}

TEST_CASE("classification partitions the domain") {
  for (int i = 0; i < 2400; ++i) {
    const Phase ph = classify_circadian_phase(i * 0.01);
    REQUIRE(family_of(ph) == CycleKind::Circadian);
  }
  int counts[8] = {};
  for (int i = 0; i <= 2700; ++i) {
    const Phase ph = classify_menstrual_phase(1 + i * 0.01);
    REQUIRE(family_of(ph) == CycleKind::Menstrual);
    ++counts[static_cast<int>(ph)];
  }
  for (Phase ph : kMenstrualPhases) CHECK(counts[static_cast<int>(ph)] > 0);
}

TEST_CASE("custom phase boundaries") {
  PhaseBoundaries b;
  b.morning_start = 6;
  CHECK(classify_circadian_phase(5.5, b) == Phase::Night);
  b.menstrual_last_day = 4;
  CHECK(classify_menstrual_phase(5, b) == Phase::Follicular);
}

TEST_CASE("sample_cycle grids") {
  CycleParams p;
  p.seed = 42;
  const auto m = sample_cycle(CycleKind::Menstrual, 28, p);
  REQUIRE(m.size() == 28);
  for (int i = 0; i < 28; ++i) CHECK(m[i].point.position == doctest::Approx(i + 1));
  CHECK(m == sample_cycle(CycleKind::Menstrual, 28, p));

  p.seed = 7;
  const auto c = sample_cycle(CycleKind::Circadian, 24, p);
  REQUIRE(c.size() == 24);
  for (int i = 0; i < 24; ++i) {
    CHECK(c[i].point.position == doctest::Approx(i));
    CHECK(c[i].phase == classify_circadian_phase(i));
    CHECK(c[i].seed == 7);
  }
  CHECK_THROWS_AS(sample_cycle(CycleKind::Circadian, 0, p), DomainError);
}

TEST_CASE("quintile bins") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto bins = quintile_bins(v);
  CHECK(bins[49] == 3);  // value 50
  CHECK(bins[99] == 5);  // value 100
  CHECK(bins[0] == 1);
  for (int b = 1; b <= 5; ++b) CHECK(std::count(bins.begin(), bins.end(), b) == 20);

  for (std::size_t n : {1, 2, 3, 4, 7, 50}) {
    std::vector<double> tie(n, 0.42);
    for (int b : quintile_bins(tie)) CHECK(b == 3);
  }
  CHECK_THROWS_AS(quintile_bins(std::vector<double>{}), DomainError);
}

TEST_CASE("quintile bin sizes for distinct values") {
  Rng rng(3);
  for (std::size_t n = 1; n <= 300; ++n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform01();
    const auto bins = quintile_bins(v);
    for (int b = 1; b <= 5; ++b) {
      const auto count = static_cast<long>(std::count(bins.begin(), bins.end(), b));
      REQUIRE(count >= static_cast<long>(n / 5) - 1);
      REQUIRE(count <= static_cast<long>((n + 4) / 5) + 1);
    }
  }
}

TEST_CASE("quintile bins are order independent") {
  std::vector<double> v = {0.3, 0.1, 0.9, 0.5, 0.5, 0.7, 0.2, 0.8, 0.6, 0.4};
  const auto bins = quintile_bins(v);
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(1);
  rng.shuffle(idx);
  std::vector<double> shuffled;
  for (auto i : idx) shuffled.push_back(v[i]);
  const auto sb = quintile_bins(shuffled);
  for (std::size_t k = 0; k < idx.size(); ++k) CHECK(sb[k] == bins[idx[k]]);
}

TEST_CASE("hormone CSV round trip") {
  CycleParams p;
  p.seed = 5;
  const auto samples = sample_cycle(CycleKind::Circadian, 6, p);
  std::stringstream ss;
  write_hormone_csv(ss, samples);
  const std::string text = ss.str();
  CHECK(text.rfind("cycle_kind,position,phase,estrogen,progesterone,lh,fsh,testosterone,cortisol,body_temp,seed\n",
                   0) == 0);
  const auto back = read_hormone_csv(ss);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].point == samples[i].point);
    CHECK(back[i].phase == samples[i].phase);
    CHECK(back[i].hormones.cortisol == doctest::Approx(samples[i].hormones.cortisol).epsilon(1e-5));
    CHECK(back[i].seed == 5);
  }
  std::stringstream again;
  write_hormone_csv(again, back);
  CHECK(again.str() == text);

  std::istringstream bad("cycle_kind,position\nMenstrual,1.00\n");
  CHECK_THROWS_AS(read_hormone_csv(bad), ParseError);
}

TEST_CASE("names round trip") {
  for (Signal s : kAllSignals) CHECK(parse_signal(to_string(s)) == s);
  for (Phase ph : kMenstrualPhases) CHECK(parse_phase(to_string(ph)) == ph);
  for (Phase ph : kCircadianPhases) CHECK(parse_phase(to_string(ph)) == ph);
  CHECK(parse_cycle_kind("CIRCADIAN") == CycleKind::Circadian);
  CHECK_THROWS_AS(parse_signal("oxytocin"), DomainError);
}

TEST_CASE("body temperature normalization") {
  HormoneState h;
  h.body_temp = 36.2;
  CHECK(h.normalized(Signal::BodyTemp) == doctest::Approx(0.0));
  h.body_temp = 37.0;
  CHECK(h.normalized(Signal::BodyTemp) == doctest::Approx(1.0));
  h.body_temp = 38.0;
  CHECK(h.normalized(Signal::BodyTemp) == 1.0);
  h.cortisol = 0.3;
  CHECK(h.normalized(Signal::Cortisol) == 0.3);
}
