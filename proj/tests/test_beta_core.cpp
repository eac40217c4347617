#include "betaspec/betaspec.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace betaspec;
using real = real128;

namespace {

real golden() { return (1 + sqrt(real(5))) / 2; }
real cubic_root() { return static_cast<real>(oracle::unity_root({1, 0, 1}, 2)); }

BetaBase<real> base_of(const real& b) { return BetaBase<real>(b); }

}  // namespace

TEST(TBeta, DyadicPoints) {
  const auto two = base_of(2);
  EXPECT_EQ(t_beta(two, real(0.25)), real(0.5));
  EXPECT_EQ(t_beta(two, real(0)), real(0));
}

TEST(TBeta, GoldenConjugateMapsToZero) {
  const auto phi = base_of(golden());
  EXPECT_LT(abs(t_beta(phi, golden() - 1)), real(1e-30));
}

TEST(TBeta, RejectsPointsOutsideUnitInterval) {
  const auto two = base_of(2);
  EXPECT_THROW(t_beta(two, real(1)), domain_error);
  EXPECT_THROW(t_beta(two, real(-0.1)), domain_error);
}

TEST(Expand, BinaryDigits) {
  const auto two = base_of(2);
  EXPECT_EQ(expand(two, real(0.8125), 4), (Word{1, 1, 0, 1}));
  EXPECT_EQ(expand(two, real(0), 3), (Word{0, 0, 0}));
}

TEST(Expand, GoldenHalfMatchesExactArithmetic) {
  const auto phi = base_of(golden());
  const Word exact = oracle::golden_greedy({oracle::rational(1, 2), 0}, 4);
  EXPECT_EQ(exact, (Word{0, 1, 0, 0}));
  EXPECT_EQ(expand(phi, real(0.5), 4), exact);
}

TEST(Expand, RoundTripAndAdmissibleOnRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (const real& b : {real(2), golden(), real("2.5"), cubic_root(), real("3.14159")}) {
    const auto base = base_of(b);
    for (int i = 0; i < 200; ++i) {
      const real x(u(rng));
      const Word w = expand(base, x, 30);
      EXPECT_TRUE(is_admissible(base, w));
      EXPECT_LT(abs(x - word_value(base, w)), pow(b, -30));
    }
  }
}

TEST(UnityExpansion, ParryExamples) {
  EXPECT_EQ(base_of(2).unity_expansion(5), (Word{1, 1, 1, 1, 1}));
  EXPECT_EQ(base_of(golden()).unity_expansion(6), (Word{1, 0, 1, 0, 1, 0}));
  EXPECT_EQ(base_of(cubic_root()).unity_expansion(6), (Word{1, 0, 0, 1, 0, 0}));
  EXPECT_EQ(base_of(golden()).parry_period(), 2u);
  EXPECT_EQ(base_of(cubic_root()).parry_period(), 3u);
}

TEST(UnityExpansion, PeriodicUpToTenPeriods) {
  for (const real& b : {real(2), golden(), cubic_root(), real(3), static_cast<real>(oracle::unity_root({2, 1}, 3))}) {
    const auto base = base_of(b);
    ASSERT_TRUE(base.parry_period());
    const std::size_t m = *base.parry_period();
    const Word d = base.unity_expansion(10 * m);
    for (std::size_t i = m; i < d.size(); ++i) EXPECT_EQ(d[i], d[i % m]);
  }
}

TEST(UnityExpansion, NonParryMatchesDirectGreedy) {
  const oracle::wide pi_like("3.14159");
  const auto base = base_of(real("3.14159"));
  EXPECT_FALSE(base.parry_period());
  EXPECT_EQ(base.unity_expansion(40), oracle::greedy_unity(pi_like, 40));
}

TEST(UnityExpansion, ShiftsNeverExceedTheSequence) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1.05, 4.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto base = base_of(real(u(rng)));
    const Word d = base.unity_expansion(std::min<std::size_t>(50, base.reliable_depth()));
    EXPECT_EQ(d.front(), static_cast<int>(floor(base.value())) - (floor(base.value()) == base.value()));
    for (std::size_t k = 1; k < d.size(); ++k) {
      std::span<const int> tail(d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
      std::span<const int> head(d.begin(), tail.size());
      EXPECT_NE(compare_lex(tail, head), LexOrder::greater);
    }
  }
}

TEST(UnityExpansion, RejectsBaseAtMostOne) {
  EXPECT_THROW(parse_base<real>("1"), domain_error);
  EXPECT_THROW(parse_base<real>("0.5"), domain_error);
}

TEST(CompareLex, ZeroPadded) {
  EXPECT_EQ(compare_lex(Word{1, 0, 1}, Word{1, 1}), LexOrder::less);
  EXPECT_EQ(compare_lex(Word{1, 0}, Word{1, 0}), LexOrder::equal);
  EXPECT_EQ(compare_lex(Word{2}, Word{1, 9, 9}), LexOrder::greater);
}

TEST(Admissible, Examples) {
  const auto phi = base_of(golden());
  EXPECT_FALSE(is_admissible(phi, Word{1, 1}));
  EXPECT_TRUE(is_admissible(phi, Word{1, 0, 1, 0}));
  EXPECT_TRUE(is_admissible(base_of(2), Word{1, 1, 1}));
}

TEST(Admissible, GoldenWordReproducedByExpand) {
  const auto phi = base_of(golden());
  const Word w{1, 0, 1, 0};
  EXPECT_EQ(expand(phi, word_value(phi, w), 4), w);
}

TEST(Admissible, NoGoldenPointStartsWithTwoOnes) {
  const auto phi = base_of(golden());
  for (int i = 0; i < 2000; ++i) {
    const Word w = expand(phi, real(i) / 2000, 2);
    EXPECT_FALSE(w[0] == 1 && w[1] == 1);
  }
}

TEST(Admissible, AgreesWithDirectCriterion) {
  struct Case {
    real beta;
    std::function<int(std::size_t)> unity;
    int max_digit;
  };
  const auto d25 = oracle::greedy_unity(oracle::wide("2.5"), 64), d17 = oracle::greedy_unity(oracle::wide("1.7"), 64);
  std::vector<Case> cases{
      {golden(), oracle::periodic({1, 0}), 1},
      {cubic_root(), oracle::periodic({1, 0, 0}), 1},
      {real(2), oracle::periodic({1}), 1},
      {real("2.5"), [d25](std::size_t i) { return d25.at(i - 1); }, 2},
      {real("1.7"), [d17](std::size_t i) { return d17.at(i - 1); }, 1},
  };
  ASSERT_EQ(d25.size(), 64u);
  for (const auto& c : cases) {
    const auto base = base_of(c.beta);
    for (std::size_t n = 1; n <= 9; ++n)
      for (const auto& w : oracle::all_words(c.max_digit, n))
        EXPECT_EQ(is_admissible(base, w), oracle::parry_admissible(w, c.unity)) << format_word(w);
  }
}

TEST(Enumerate, Examples) {
  EXPECT_EQ(enumerate_words(base_of(2), 3).size(), 8u);
  EXPECT_EQ(enumerate_words(base_of(golden()), 5).size(), 13u);
}

TEST(Enumerate, CubicRootMatchesBruteForce) {
  std::size_t brute = 0;
  for (const auto& w : oracle::all_words(1, 4)) brute += oracle::parry_admissible(w, oracle::periodic({1, 0, 0}));
  EXPECT_EQ(brute, 6u);
  EXPECT_EQ(enumerate_words(base_of(cubic_root()), 4).size(), brute);
}

TEST(Enumerate, TruncatedCubicDecimalMatchesBruteForce) {
  const oracle::wide b("1.4655712319");
  const auto d = oracle::greedy_unity(b, 40);
  std::size_t brute = 0;
  for (const auto& w : oracle::all_words(1, 4))
    brute += oracle::parry_admissible(w, [&](std::size_t i) { return d.at(i - 1); });
  EXPECT_EQ(enumerate_words(base_of(real("1.4655712319")), 4).size(), brute);
}

TEST(Enumerate, LexOrderAndVolumeBounds) {
  for (const real& b : {golden(), real("2.5"), cubic_root(), real("1.7")}) {
    const auto base = base_of(b);
    const double beta = static_cast<double>(b);
    for (std::size_t n = 1; n <= 10; ++n) {
      const auto words = enumerate_words(base, n);
      EXPECT_TRUE(std::is_sorted(words.begin(), words.end()));
      const double count = static_cast<double>(words.size());
      EXPECT_GE(count, std::pow(beta, n) - 1e-9);
      EXPECT_LE(count, std::pow(beta, n + 1) / (beta - 1) + 1e-9);
      EXPECT_EQ(count_words(base, n), count_t(words.size()));
    }
  }
}

TEST(Enumerate, BudgetExceeded) {
  ComputeOptions opts;
  opts.enum_budget = 1000;
  EXPECT_THROW(enumerate_words(base_of(2), 12, opts), budget_error);
}

TEST(Enumerate, FibonacciByCounting) {
  const auto phi = base_of(golden());
  for (std::size_t n = 1; n <= 40; ++n) EXPECT_EQ(count_words(phi, n), oracle::fibonacci(n + 2));
}

TEST(Cylinder, Examples) {
  const auto two = base_of(2);
  const auto c = cylinder(two, Word{1, 0});
  EXPECT_EQ(c.left, real(0.5));
  EXPECT_EQ(c.length, real(0.25));

  const real g = golden();
  const auto phi = base_of(g);
  const auto one = cylinder(phi, Word{1});
  EXPECT_LT(abs(one.left - 1 / g), real(1e-30));
  EXPECT_LT(abs(one.length - 1 / (g * g)), real(1e-30));
  const auto zero = cylinder(phi, Word{0});
  EXPECT_EQ(zero.left, real(0));
  EXPECT_LT(abs(zero.length - 1 / g), real(1e-30));
}

TEST(Cylinder, GoldenGridMatchesEndpoints) {
  const auto phi = base_of(golden());
  for (const Word& w : {Word{1}, Word{0}, Word{1, 0, 1}, Word{0, 1, 0, 0}}) {
    const auto c = cylinder(phi, w);
    for (int i = 0; i < 4000; ++i) {
      const real x = (real(i) + real(0.5)) / 4000;
      const bool inside = expand(phi, x, w.size()) == w;
      EXPECT_EQ(inside, x >= c.left && x < c.right()) << format_word(w) << " at " << static_cast<double>(x);
    }
  }
}

TEST(Cylinder, InadmissibleWordRejected) {
  EXPECT_THROW(cylinder(base_of(golden()), Word{1, 1}), input_error);
}

TEST(IsFull, Examples) {
  const auto phi = base_of(golden());
  EXPECT_FALSE(is_full(phi, Word{1}));
  EXPECT_TRUE(is_full(phi, Word{1, 0, 0}));
  for (const auto& w : enumerate_words(base_of(2), 6)) EXPECT_TRUE(is_full(base_of(2), w));
}

TEST(IsFull, MatchesLengthComparison) {
  for (const real& b : {golden(), cubic_root(), real("2.5"), real("1.7")}) {
    const auto base = base_of(b);
    for (const auto& w : enumerate_words(base, 7)) {
      const auto c = cylinder(base, w);
      const real full = pow(b, -7);
      EXPECT_LE(c.length, full * (1 + real(1e-30)));
      EXPECT_GT(c.length, real(0));
      EXPECT_EQ(is_full(base, w), abs(c.length - full) < full * real(1e-25)) << format_word(w);
    }
  }
}

TEST(Birkhoff, Examples) {
  const auto two = base_of(2);
  EXPECT_DOUBLE_EQ(birkhoff_sum(two, Observable<real>::first_digit(two), real(0.8125), 4), 3.0);
  EXPECT_DOUBLE_EQ(birkhoff_sum(two, Observable<real>::affine(1, 0), real(0), 5), 0.0);
  const auto phi = base_of(golden());
  const Word w{1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(birkhoff_sum(phi, Observable<real>::first_digit(phi), cylinder(phi, w).left, 4), 2.0);
}

TEST(Birkhoff, BoundedBySupNorm) {
  const auto base = base_of(real("2.5"));
  const auto psi = Observable<real>::affine(-1.5, 0.7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i)
    EXPECT_LE(std::abs(birkhoff_sum(base, psi, real(u(rng)), 40)), 40 * psi.sup_norm() + 1e-12);
}

TEST(AverageStability, Examples) {
  EXPECT_EQ(average_stability_bound(1.0, 3, 0.1), 61u);
  EXPECT_EQ(average_stability_bound(0.0, 7, 0.01), 1u);
  EXPECT_EQ(average_stability_bound(1.0, 0, 0.1), 1u);
}

TEST(AverageStability, HoldsOnRandomPoints) {
  const auto two = base_of(2);
  const auto psi = Observable<real>::first_digit(two);
  const std::size_t n0 = average_stability_bound(psi, 3, 0.1);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    const real x(u(rng));
    const double a = birkhoff_sum(two, psi, x, n0) / n0;
    const double b = birkhoff_sum(two, psi, x, n0 + 3) / (n0 + 3);
    EXPECT_LT(std::abs(a - b), 0.1);
  }
}

TEST(ParryDensity, Examples) {
  EXPECT_DOUBLE_EQ(parry_density(base_of(2), real(0.3), 50), 1.0);
  const real g = golden();
  const auto phi = base_of(g);
  EXPECT_NEAR(parry_density(phi, real(0.5), 50), static_cast<double>(1 + 1 / g), 1e-15);
  EXPECT_DOUBLE_EQ(parry_density(phi, real(0.9), 50), 1.0);
}

TEST(ParryDensity, NormalizedIntegralIsOne) {
  const real g = golden();
  const ParryDensity<real> rho(base_of(g), 50);
  // ρ = 1 + φ^{-1}·1[x ≤ φ−1], so ∫ρ = 1 + (φ−1)²
  const double exact = static_cast<double>(1 + (g - 1) * (g - 1));
  EXPECT_NEAR(rho.normalizer(10000), exact, 1e-6);
  EXPECT_NEAR(rho.integrate([](double) { return 1.0; }, 10000) / rho.normalizer(10000), 1.0, 1e-6);
  for (const real& b : {real("2.5"), cubic_root(), real("1.7")}) {
    const ParryDensity<real> r(base_of(b), 60);
    const double z = r.normalizer(10000);
    EXPECT_GT(z, 0);
    EXPECT_NEAR(r.expectation([](double) { return 1.0; }, 10000), 1.0, 1e-6);
  }
}

TEST(AccumulationTrace, WindowEstimatesAreOrderedAndBounded) {
  const auto base = base_of(real("2.5"));
  const auto psi = Observable<real>::first_digit(base);
  const auto trace = accumulation_trace(base, psi, real("0.3141"), 100);
  EXPECT_LE(trace.liminf_est, trace.limsup_est);
  for (double a : trace.averages) EXPECT_LE(std::abs(a), psi.sup_norm());
  EXPECT_EQ(trace.window_begin, 50u);
}

TEST(AccumulationTrace, DigitTraceMatchesPointTrace) {
  const auto base = base_of(real("2.5"));
  const auto psi = Observable<real>::affine(1, 0);
  const real x("0.4142135623730950488");
  const auto direct = accumulation_trace(base, psi, x, 60);
  const Word digits = expand(base, x, 200);
  const auto rebuilt = accumulation_trace_digits(base, psi, digits);
  for (std::size_t n = 1; n <= 60; ++n) EXPECT_NEAR(direct.average(n), rebuilt.average(n), 1e-12);
}

TEST(AccumulationTrace, IntervalFillingOnBlockPoint) {
  Word digits;
  for (std::size_t k = 1; digits.size() < 100000; ++k) {
    const std::size_t len = std::size_t(1) << (2 * k);
    digits.insert(digits.end(), len, 0);
    digits.insert(digits.end(), len, 1);
  }
  digits.resize(100000);
  const auto two = base_of(2);
  const auto trace = accumulation_trace_digits(two, Observable<real>::first_digit(two), digits);
  EXPECT_LT(trace.liminf_est + 0.1, trace.limsup_est);
  EXPECT_LE(interval_filling_gap(trace, trace.liminf_est + 0.02, trace.limsup_est - 0.02), 0.02);
}
