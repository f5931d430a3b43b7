#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace endorhythm::stats {

enum class TestKind { WelchT, AnovaF, PearsonR, KS2 };

std::string_view to_string(TestKind kind);

// Outcome of a hypothesis test. All p-values are two-sided.
//
// df1/df2 by kind:
//   WelchT   - Welch-Satterthwaite df, 0
//   AnovaF   - k-1, N-k
//   PearsonR - n-2, 0
//   KS2      - sample sizes n_a, n_b
struct TestResult {
  TestKind kind;
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
};

double mean(std::span<const double> x);
// Sample variance, n-1 denominator.
double variance(std::span<const double> x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees.
double student_t_two_sided(double t, double df);
// Upper tail P(F >= f) for the F distribution.
double f_upper_tail(double f, double df1, double df2);

TestResult welch_t_test(std::span<const double> a, std::span<const double> b);
TestResult one_way_anova(const std::vector<std::vector<double>>& groups);
TestResult pearson(std::span<const double> x, std::span<const double> y);

// Asymptotic two-sample Kolmogorov-Smirnov test. p is approximate for
// fewer than ~8 observations per sample.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda);

struct Interval {
  double lo;
  double hi;
};

Interval wilson_interval(long successes, long n, double z = 1.96);

}  // namespace endorhythm::stats
