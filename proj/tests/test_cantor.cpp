#include "betaspec/betaspec.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace betaspec;
using real = real128;

namespace {

real golden() { return (1 + sqrt(real(5))) / 2; }
BetaBase<real> base_of(const real& b) { return BetaBase<real>(b); }

struct Built {
  BetaBase<real> base = base_of(2);
  Observable<real> psi = Observable<real>::first_digit(base);
  CantorSchedule schedule;
  std::vector<PoolD<real>> pools;
};

/// β = 2, first digit, [0.25, 0.75], δ = 0.1, four stages.
const Built& binary_construction() {
  static const Built b = [] {
    Built x;
    x.schedule = make_schedule(x.base, x.psi, 0.25, 0.75, 0.1, 4);
    x.pools = build_pools(x.base, x.psi, x.schedule);
    return x;
  }();
  return b;
}

std::vector<CylinderInterval<real>> homogeneous_intervals(int base, const std::vector<int>& digits, int depth) {
  std::vector<CylinderInterval<real>> level{{real(0), real(1), 0}};
  for (int d = 0; d < depth; ++d) {
    std::vector<CylinderInterval<real>> next;
    for (const auto& iv : level)
      for (int digit : digits) next.push_back({iv.left + iv.length * digit / base, iv.length / base, iv.order + 1});
    level = std::move(next);
  }
  return level;
}

std::vector<double> powers(double base, int lo, int hi) {
  std::vector<double> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::pow(base, -k));
  return out;
}

}  // namespace

TEST(Schedule, StageInequalitiesHoldOnRecount) {
  const auto two = base_of(2);
  const auto digit = Observable<real>::first_digit(two);
  const auto s = make_schedule(two, digit, 0.25, 0.75, 0.15, 4);
  ASSERT_TRUE(s.feasible);
  ASSERT_EQ(s.stages.size(), 4u);
  EXPECT_TRUE(audit_schedule(s).empty());
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    EXPECT_EQ(st.target, k % 2 == 0 ? 0.25 : 0.75);
    const auto p = count_F(two, digit, st.n, st.target, st.eps, st.N);
    EXPECT_EQ(p.count, st.pool_size);
    const double ref = k % 2 == 0 ? s.reference_a : s.reference_b;
    EXPECT_LT(std::abs(p.estimate - ref), 0.15);
    EXPECT_GE(static_cast<double>(st.n) / (st.n + st.N), 1 - 0.15);
    const auto orders = valid_orders(two, st.N);
    EXPECT_EQ(orders.back(), st.N);
    if (k > 0) {
      EXPECT_LT(st.eps, s.stages[k - 1].eps);
      EXPECT_GT(st.N, s.stages[k - 1].N);
    }
    const std::uint64_t next = k + 1 < s.stages.size() ? s.stages[k + 1].word_length() : 0;
    EXPECT_GE(st.ell, 16 * std::max<std::uint64_t>(next, s.checkpoint(k)));
  }
}

TEST(Schedule, InputChecks) {
  const auto two = base_of(2);
  const auto digit = Observable<real>::first_digit(two);
  EXPECT_THROW(make_schedule(two, digit, 0.25, 0.75, 0.5, 2), input_error);
  EXPECT_THROW(make_schedule(two, digit, 0.25, 0.75, 0.0, 2), input_error);
  EXPECT_THROW(make_schedule(two, digit, 0.75, 0.25, 0.1, 2), input_error);
}

TEST(Schedule, DegenerateIntervalTargetsOnePoint) {
  const auto two = base_of(2);
  const auto s = make_schedule(two, Observable<real>::first_digit(two), 0.4, 0.4, 0.1, 3);
  ASSERT_TRUE(s.feasible);
  for (const auto& st : s.stages) EXPECT_EQ(st.target, 0.4);
}

TEST(Pools, BinaryBandWithoutOrderRestriction) {
  const auto two = base_of(2);
  const auto digit = Observable<real>::first_digit(two);
  EXPECT_EQ(oracle::binomial_band(8, 0.75, 0.1), oracle::big(28));
  EXPECT_EQ(count_F(two, digit, 8, 0.75, 0.1).count, count_t(28));
}

TEST(Pools, OrderTwoForbidsDenseWords) {
  // under the order-2 approximant the words avoid "11", so at most 4 ones fit in 8 digits
  const auto two = base_of(2);
  const auto digit = Observable<real>::first_digit(two);
  std::size_t brute = 0;
  for (const auto& w : oracle::all_words(1, 8)) {
    const int ones = std::accumulate(w.begin(), w.end(), 0);
    if (oracle::parry_admissible(w, oracle::periodic({1, 0})) && std::abs(ones / 8.0 - 0.75) < 0.1) ++brute;
  }
  EXPECT_EQ(brute, 0u);
  const auto pool = build_pool(two, digit, 1, 0.75, 0.1, 2, 8);
  EXPECT_EQ(pool.size, count_t(0));
  EXPECT_FALSE(pool.deviation_ok);
}

TEST(Pools, LongPaddingBreaksStageAverage) {
  const auto two = base_of(2);
  const auto pool = build_pool(two, Observable<real>::first_digit(two), 1, 0.75, 0.1, 8, 8);
  EXPECT_EQ(pool.size, count_t(28));
  EXPECT_NEAR(pool.max_deviation, 0.75 - 6.0 / 16, 1e-12);
  EXPECT_FALSE(pool.deviation_ok);
}

TEST(Pools, TargetOutsideRangeIsInfeasible) {
  const auto two = base_of(2);
  const auto digit = Observable<real>::first_digit(two);
  EXPECT_EQ(build_pool(two, digit, 1, 1.5, 0.1, 3, 20).size, count_t(0));
  CantorSchedule s;
  s.a = s.b = 1.5;
  s.stages.push_back({1, 1.5, 0.1, 3, 20, 100, 0});
  EXPECT_THROW(build_pools(two, digit, s), schedule_infeasible);
}

TEST(Pools, GoldenZeroTargetContainsZeroWord) {
  const auto phi = base_of(golden());
  const auto pool = build_pool(phi, Observable<real>::first_digit(phi), 1, 0.0, 0.2, 3, 6);
  const auto words = pool.words();
  EXPECT_NE(std::find(words.begin(), words.end(), zeros(9)), words.end());
}

TEST(Pools, WordsAreFullPaddedAndNearTarget) {
  const auto phi = base_of(golden());
  const auto psi = Observable<real>::first_digit(phi);
  for (double target : {0.1, 0.3}) {
    const auto pool = build_pool(phi, psi, 1, target, 0.1, 5, 16);
    ASSERT_GE(pool.size, count_t(2));
    const auto words = pool.words();
    EXPECT_EQ(count_t(words.size()), pool.size);
    for (const auto& w : words) {
      ASSERT_EQ(w.size(), 21u);
      EXPECT_TRUE(std::all_of(w.end() - 5, w.end(), [](int d) { return d == 0; }));
      EXPECT_TRUE(is_full(phi, w));
      const double avg = std::accumulate(w.begin(), w.end(), 0.0) / 21;
      EXPECT_LT(std::abs(avg - target), 2 * 0.1);
    }
  }
}

TEST(Pools, ContinuousObservablePool) {
  const auto two = base_of(2);
  const auto psi = Observable<real>::affine(1, 0);
  const auto pool = build_pool(two, psi, 1, 0.5, 0.1, 2, 10);
  ASSERT_GE(pool.size, count_t(2));
  for (const auto& w : pool.words()) {
    EXPECT_TRUE(is_full(two, w));
    const auto c = cylinder(two, w);
    EXPECT_LT(std::abs(birkhoff_sum(two, psi, c.midpoint(), 12) / 12 - 0.5), 2 * 0.1 + pool.max_deviation);
  }
}

TEST(Generations, SingleStageProduct) {
  const auto two = base_of(2);
  const auto pool = PoolD<real>::from_words({{0, 0}, {1, 0}});
  const auto tree = build_generations(two, {pool}, std::vector<std::uint64_t>{3}, 6);
  ASSERT_EQ(tree.generations.size(), 4u);
  EXPECT_EQ(tree.generations[3].size(), 8u);
  for (const auto& iv : tree.generations[3]) EXPECT_EQ(iv.length, pow(real(4), -3));
}

TEST(Generations, NestedDisjointHomogeneous) {
  const auto phi = base_of(golden());
  const auto p1 = PoolD<real>::from_words({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}}, 1);
  const auto p2 = PoolD<real>::from_words({{1, 0, 1, 0, 0, 0}, {0, 0, 1, 0, 0, 0}}, 2);
  const auto tree = build_generations(phi, {p1, p2}, std::vector<std::uint64_t>{2, 2}, 20);
  ASSERT_EQ(tree.generations.size(), 5u);
  const std::vector<std::size_t> widths{4, 4, 6, 6};
  std::size_t depth = 0;
  for (std::size_t i = 1; i < tree.generations.size(); ++i) {
    depth += widths[i - 1];
    const auto& parents = tree.generations[i - 1];
    const auto& kids = tree.generations[i];
    const std::size_t m = kids.size() / parents.size();
    EXPECT_EQ(kids.size(), parents.size() * m);
    EXPECT_EQ(tree.run_of(i).m, count_t(m));
    EXPECT_LE(static_cast<double>(m) * std::exp(tree.run_of(i).log_c), 1.0);
    for (std::size_t p = 0; p < parents.size(); ++p) {
      const auto& J = parents[p];
      for (std::size_t c = 0; c < m; ++c) {
        const auto& K = kids[p * m + c];
        EXPECT_GE(K.left, J.left - real(1e-35));
        EXPECT_LE(K.right(), J.right() + real(1e-35));
        EXPECT_LT(abs(K.length / J.length - pow(golden(), -static_cast<int>(widths[i - 1]))), real(1e-30));
        EXPECT_LT(abs(K.length - pow(golden(), -static_cast<int>(depth))), real(1e-30));
      }
    }
    auto sorted = kids;
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.left < y.left; });
    for (std::size_t j = 1; j < sorted.size(); ++j) EXPECT_LE(sorted[j - 1].right(), sorted[j].left + real(1e-35));
  }
}

TEST(Generations, LevelRecordsBeyondMaterialization) {
  const auto& c = binary_construction();
  const auto tree = build_generations(c.base, c.pools, c.schedule, 0);
  EXPECT_EQ(tree.generations.size(), 1u);
  EXPECT_EQ(tree.total_levels(), c.schedule.total_levels());
  for (std::size_t k = 0; k < c.schedule.stages.size(); ++k) {
    const auto& st = c.schedule.stages[k];
    const auto& run = tree.run_of(tree.runs[k].first_level);
    EXPECT_EQ(run.m, st.pool_size);
    EXPECT_DOUBLE_EQ(run.log_c, -static_cast<double>(st.word_length()) * std::log(2.0));
  }
}

TEST(Generations, SampledBranchesAlternateBlockFlavours) {
  const auto& c = binary_construction();
  std::mt19937_64 rng(99);
  const std::uint64_t t2 = c.schedule.checkpoint(2);
  for (int trial = 0; trial < 4; ++trial) {
    const Word digits = sample_branch(c.pools, c.schedule, t2, rng);
    ASSERT_EQ(digits.size(), t2);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& st = c.schedule.stages[k];
      for (std::uint64_t l = 0; l < st.ell; ++l) {
        const auto first = digits.begin() + static_cast<std::ptrdiff_t>(pos);
        const double avg = std::accumulate(first, first + static_cast<std::ptrdiff_t>(st.word_length()), 0.0) /
                           static_cast<double>(st.word_length());
        ASSERT_LT(std::abs(avg - st.target), 2 * st.eps);
        ASSERT_TRUE(std::all_of(first + static_cast<std::ptrdiff_t>(st.n),
                                first + static_cast<std::ptrdiff_t>(st.word_length()), [](int d) { return d == 0; }));
        pos += st.word_length();
      }
    }
    EXPECT_TRUE(is_admissible(c.base, digits));
  }
}

TEST(DimensionBound, ConstantSchedules) {
  const auto cantor = GenerationTree<real>::homogeneous(2, 1.0 / 3, 201);
  EXPECT_NEAR(lemma54_lower_bound(cantor, 200), std::log(2.0) / std::log(3.0), 1e-2);
  const auto full = GenerationTree<real>::homogeneous(3, 1.0 / 3, 201);
  EXPECT_NEAR(lemma54_lower_bound(full, 200), 1.0, 1e-2);
  EXPECT_THROW(lemma54_lower_bound(full, 1), input_error);
}

TEST(DimensionBound, BinaryConstructionBound) {
  const auto& c = binary_construction();
  const auto tree = build_generations(c.base, c.pools, c.schedule, 0);
  EXPECT_GE(lemma54_lower_bound(tree, tree.total_levels() - 1), (1 - 0.1) * (oracle::entropy_bits(0.25) - 0.1));
}

TEST(BoxDimension, MiddleThirds) {
  const auto ivs = homogeneous_intervals(3, {0, 2}, 10);
  const auto fit = box_dimension<real>(ivs, powers(3, 2, 8));
  EXPECT_NEAR(fit.dimension, std::log(2.0) / std::log(3.0), 0.02);
  EXPECT_EQ(fit.table.size(), 7u);
}

TEST(BoxDimension, UnitInterval) {
  const std::vector<CylinderInterval<real>> unit{{real(0), real(1), 0}};
  EXPECT_NEAR(box_dimension<real>(unit, std::vector<double>{0.1, 0.01, 0.001, 1e-4}).dimension, 1.0, 1e-6);
  EXPECT_THROW(box_dimension<real>(unit, std::vector<double>{0.1}), input_error);
}

TEST(BoxDimension, AgreesWithDimensionBoundOnConstantSchedules) {
  const std::vector<std::tuple<int, std::vector<int>>> cases{{3, {0, 2}}, {4, {0, 1, 2}}, {2, {0, 1}}};
  for (const auto& [b, digits] : cases) {
    const double m = static_cast<double>(digits.size());
    const auto tree = GenerationTree<real>::homogeneous(count_t(digits.size()), 1.0 / b, 201);
    const double box = box_dimension<real>(homogeneous_intervals(b, digits, 10), powers(b, 2, 8)).dimension;
    EXPECT_NEAR(box, lemma54_lower_bound(tree, 200), 0.03);
    EXPECT_NEAR(box, std::log(m) / std::log(static_cast<double>(b)), 0.03);
  }
}

TEST(BoxDimension, BinaryConstructionAtThirdCheckpoint) {
  const auto& c = binary_construction();
  const std::uint64_t t3 = c.schedule.checkpoint(3);
  std::vector<std::uint64_t> depths;
  for (std::uint64_t i = 1; i <= 20; ++i) depths.push_back(t3 / 20 * i);
  const auto fit = tree_box_dimension(c.base, c.pools, c.schedule, depths);
  EXPECT_NEAR(fit.dimension, oracle::entropy_bits(0.25), 0.15);
}

TEST(Oscillation, BinaryConstructionPasses) {
  const auto& c = binary_construction();
  OscillationOptions opt;
  opt.samples = 100;
  opt.seed = 1;
  const auto rep = oscillation_check(c.base, c.psi, c.pools, c.schedule, opt);
  EXPECT_TRUE(rep.passed);
  ASSERT_EQ(rep.checkpoints.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(rep.checkpoints[k].t, c.schedule.checkpoint(k + 1));
    EXPECT_DOUBLE_EQ(rep.checkpoints[k].tolerance, 2 * c.schedule.stages[k].eps + 0.05);
    EXPECT_LE(rep.checkpoints[k].max_deviation, rep.checkpoints[k].tolerance);
  }
}

TEST(Oscillation, DeterministicAcrossThreads) {
  const auto& c = binary_construction();
  OscillationOptions one, many;
  one.samples = many.samples = 20;
  one.seed = many.seed = 5;
  many.threads = 8;
  const auto a = oscillation_check(c.base, c.psi, c.pools, c.schedule, one);
  const auto b = oscillation_check(c.base, c.psi, c.pools, c.schedule, many);
  EXPECT_EQ(a.running_max, b.running_max);
  EXPECT_EQ(a.running_min, b.running_min);
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k)
    EXPECT_EQ(a.checkpoints[k].max_deviation, b.checkpoints[k].max_deviation);
}

TEST(Oscillation, DegenerateTargetConverges) {
  const auto two = base_of(2);
  const auto psi = Observable<real>::first_digit(two);
  const auto s = make_schedule(two, psi, 0.4, 0.4, 0.1, 2);
  const auto pools = build_pools(two, psi, s);
  OscillationOptions opt;
  opt.samples = 20;
  const auto rep = oscillation_check(two, psi, pools, s, opt);
  EXPECT_TRUE(rep.passed);
  EXPECT_LE(rep.checkpoints.back().max_deviation, 2 * s.stages[1].eps);
}

TEST(Oscillation, ZeroObservable) {
  const auto two = base_of(2);
  const auto zero = Observable<real>::zero();
  const auto s = make_schedule(two, zero, 0.0, 0.0, 0.3, 2);
  const auto pools = build_pools(two, zero, s);
  OscillationOptions opt;
  opt.samples = 10;
  const auto rep = oscillation_check(two, zero, pools, s, opt);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.running_max, 0.0);
  EXPECT_EQ(rep.running_min, 0.0);

  bool rejected = false;
  try {
    const auto off = make_schedule(two, zero, 0.5, 0.5, 0.3, 2);
    const auto off_pools = build_pools(two, zero, off);
    rejected = !off.feasible || !oscillation_check(two, zero, off_pools, off, opt).passed;
  } catch (const schedule_infeasible&) {
    rejected = true;
  } catch (const input_error&) {
    rejected = true;
  }
  EXPECT_TRUE(rejected);
}
