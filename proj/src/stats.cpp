#include "endorhythm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "endorhythm/error.hpp"

namespace endorhythm::stats {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 100000;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite observation");
}

}  // namespace

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::WelchT: return "WelchT";
    case TestKind::AnovaF: return "AnovaF";
    case TestKind::PearsonR: return "PearsonR";
    case TestKind::KS2: return "KS2";
  }
  return "?";
}

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two observations");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta shapes must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta argument must be in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fastest below the mean of the beta distribution;
  // above it, use the reflection I_x(a,b) = 1 - I_{1-x}(b,a).
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return clamp_p(front * beta_continued_fraction(a, b, x) / a);
  }
  return clamp_p(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b);
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw DomainError("t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  return reg_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double f_upper_tail(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F distribution needs positive df");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return reg_incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("welch_t_test needs >= 2 observations per sample");
  require_finite(a, "welch_t_test");
  require_finite(b, "welch_t_test");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = variance(a) / na;
  const double vb = variance(b) / nb;
  if (va == 0.0 && vb == 0.0) throw DegenerateInputError("welch_t_test: both samples have zero variance");

  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return {TestKind::WelchT, t, df, 0.0, student_t_two_sided(t, df)};
}

TestResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DomainError("one_way_anova needs >= 2 groups");
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DomainError("one_way_anova needs >= 2 observations per group");
    require_finite(g, "one_way_anova");
    total += std::accumulate(g.begin(), g.end(), 0.0);
    n += g.size();
  }
  const double grand = total / static_cast<double>(n);

  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  if (ssw == 0.0) throw DegenerateInputError("one_way_anova: no within-group variance");

  const double df1 = static_cast<double>(groups.size() - 1);
  const double df2 = static_cast<double>(n - groups.size());
  const double f = (ssb / df1) / (ssw / df2);
  return {TestKind::AnovaF, f, df1, df2, f_upper_tail(f, df1, df2)};
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson needs samples of equal length");
  if (x.size() < 3) throw DomainError("pearson needs >= 3 pairs");
  require_finite(x, "pearson");
  require_finite(y, "pearson");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("pearson: zero variance");

  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(x.size() - 2);
  if (std::abs(r) == 1.0) return {TestKind::PearsonR, r, df, 0.0, 0.0};
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return {TestKind::PearsonR, r, df, 0.0, student_t_two_sided(t, df)};
}

double kolmogorov_tail(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= kMaxIterations; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-10) break;
    sign = -sign;
  }
  return clamp_p(2.0 * sum);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample needs non-empty samples");
  require_finite(a, "ks_two_sample");
  require_finite(b, "ks_two_sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Step both right-continuous ECDFs past every copy of the next pooled value.
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }

  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  const double p = d == 0.0 ? 1.0 : kolmogorov_tail(lambda);
  return {TestKind::KS2, d, na, nb, p};
}

Interval wilson_interval(long successes, long n, double z) {
  if (n < 1) throw DomainError("wilson_interval needs n >= 1");
  if (successes < 0 || successes > n) throw DomainError("wilson_interval needs 0 <= successes <= n");
  if (!(z > 0.0)) throw DomainError("wilson_interval needs z > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.lo = 0.0;
  if (successes == n) ci.hi = 1.0;
  return ci;
}

}  // namespace endorhythm::stats
