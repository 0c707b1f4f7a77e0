#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "cgmh/error.hpp"
#include "cgmh/fixtures.hpp"
#include "cgmh/oracle.hpp"
#include "cgmh/sampler.hpp"
#include "test_util.hpp"

namespace cgmh {
namespace {

TEST(MicroSpace, Counts) {
  const auto v3 = fixtures::uniform3().vocab;
  EXPECT_EQ(enumerate_space(*v3, 3).size(), 39u);
  EXPECT_EQ(enumerate_space(*v3, 4).size(), 120u);
  EXPECT_EQ(MicroSpace({7}, 2).size(), 2u);
  EXPECT_THROW(MicroSpace({4, 5, 6, 7, 8, 9, 10, 11, 12, 13}, 7), DataError);
}

TEST(MicroSpace, OrderAndIndex) {
  const MicroSpace s({6, 4, 5, 4}, 2);
  ASSERT_EQ(s.size(), 12u);
  EXPECT_EQ(s.state(0), (Sentence{4}));
  EXPECT_EQ(s.state(2), (Sentence{6}));
  EXPECT_EQ(s.state(3), (Sentence{4, 4}));
  EXPECT_EQ(s.state(11), (Sentence{6, 6}));
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.index_of(s.state(i)), i);
  EXPECT_FALSE(s.index_of(Sentence{4, 4, 4}));
}

TEST(ExactStationary, UniformClosedForm) {
  const auto fx = fixtures::uniform3();
  const auto space = enumerate_space(*fx.vocab, 3);
  const auto pi = exact_stationary(space, ConstraintSpec(fx.vocab), *fx.forward);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double expect = space.state(i).size() == 1 ? 16.0 / 111 : space.state(i).size() == 2 ? 4.0 / 111 : 1.0 / 111;
    EXPECT_NEAR(pi[i], expect, 1e-15);
  }
}

TEST(ExactStationary, KeywordZerosAndRenormalization) {
  const auto fx = fixtures::uniform3();
  const auto space = enumerate_space(*fx.vocab, 3);
  const auto pi = exact_stationary(space, ConstraintSpec(fx.vocab, {5}), *fx.forward);
  // States with b: 1 of length 1, 5 of length 2, 19 of length 3.
  const double z = 1.0 / 16 + 5.0 / 64 + 19.0 / 256;
  double sum = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& s = space.state(i);
    const double expect = s.contains(5) ? std::pow(0.25, double(s.size() + 1)) / z : 0.0;
    EXPECT_NEAR(pi[i], expect, 1e-15);
    sum += pi[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(exact_stationary(MicroSpace({4}, 2), ConstraintSpec(fx.vocab, {5}), *fx.forward), DataError);
}

TEST(ExactStationary, BigramMatchesSequenceScores) {
  const auto fx = fixtures::bigram3();
  const auto space = enumerate_space(*fx.vocab, 3);
  const auto pi = exact_stationary(space, ConstraintSpec(fx.vocab), *fx.forward);
  double z = 0;
  for (const auto& s : space.states()) z += std::exp(fx.forward->seq_logprob(s));
  for (std::size_t i = 0; i < space.size(); ++i) {
    EXPECT_NEAR(pi[i], std::exp(fx.forward->seq_logprob(space.state(i))) / z, 1e-14);
  }
}

std::size_t token_edit_distance(const Sentence& a, const Sentence& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

TEST(ExactKernel, StochasticLocalAndBalanced) {
  for (const auto& fx : {fixtures::uniform3(), fixtures::bigram3()}) {
    const ConstraintSpec spec(fx.vocab);
    const Target t{*fx.forward, *fx.backward, spec};
    const auto space = enumerate_space(*fx.vocab, 3);
    const auto P = exact_kernel(space, {}, t);
    const auto pi = exact_stationary(space, spec, *fx.forward);
    for (std::size_t i = 0; i < P.size(); ++i) {
      double sum = 0;
      for (const auto& [j, p] : P.row(i)) {
        sum += p;
        if (j != i && p > 0) EXPECT_EQ(token_edit_distance(space.state(i), space.state(j)), 1u);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    const auto audit = audit_kernel(P, pi);
    EXPECT_LT(audit.max_balance_violation, 1e-12);
    EXPECT_LT(audit.max_stationarity_error, 1e-12);
    EXPECT_TRUE(audit.irreducible);
    EXPECT_TRUE(audit.aperiodic);
    EXPECT_EQ(audit.support_size, 39u);
  }
}

TEST(ExactKernel, RowMatchesSimulatedSteps) {
  const auto fx = fixtures::bigram3();
  const ConstraintSpec spec(fx.vocab);
  const Target t{*fx.forward, *fx.backward, spec};
  const auto space = enumerate_space(*fx.vocab, 3);
  const auto P = exact_kernel(space, {}, t);
  SamplerConfig cfg;
  cfg.exact = true;
  cfg.max_len = 3;
  const auto pcfg = cfg.proposal_config();
  const Sentence x = test::S(*fx.vocab, "a b");
  const auto i = *space.index_of(x);
  Rng rng(99);
  std::map<std::size_t, double> freq;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto r = step(x, t.logscore(x), cfg, pcfg, t, rng);
    freq[*space.index_of(r.state)] += 1.0 / n;
  }
  for (const auto& [j, p] : P.row(i)) EXPECT_NEAR(freq[j], p, 0.006) << detokenize(space.state(j), *fx.vocab);
  for (const auto& [j, f] : freq) EXPECT_GT(P.at(i, j), 0.0);
}

TEST(ExactKernel, KeywordSupportStaysConnected) {
  const auto fx = fixtures::bigram3();
  const ConstraintSpec spec(fx.vocab, {5});
  const Target t{*fx.forward, *fx.backward, spec};
  const auto space = enumerate_space(*fx.vocab, 3);
  const auto P = exact_kernel(space, {}, t);
  const auto audit = audit_kernel(P, exact_stationary(space, spec, *fx.forward));
  EXPECT_EQ(audit.support_size, 25u);
  EXPECT_TRUE(audit.irreducible);
  EXPECT_LT(audit.max_balance_violation, 1e-12);
}

TEST(StronglyConnected, SmallGraphs) {
  SparseKernel k(3);
  k.row(0) = {{1, 1.0}};
  k.row(1) = {{2, 1.0}};
  k.row(2) = {{2, 1.0}};
  const std::vector<char> all{1, 1, 1};
  EXPECT_FALSE(strongly_connected(k, all));
  k.row(2) = {{0, 1.0}};
  EXPECT_TRUE(strongly_connected(k, all));
  EXPECT_DOUBLE_EQ(k.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(k.at(0, 2), 0.0);
}

TEST(TvDistance, Examples) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{0.5, 0.5}, d{0.25, 0.75};
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance(c, d), 0.25);
  EXPECT_DOUBLE_EQ(tv_distance(c, c), 0.0);
  EXPECT_NEAR(tv_distance(c, std::vector<double>{0.9, 0.1}), 0.4, 1e-15);
  EXPECT_THROW(tv_distance(a, std::vector<double>{1}), ContractError);
}

TEST(EmpiricalDistribution, CountsAndErrors) {
  const MicroSpace s({4, 5}, 1);
  const std::vector<Sentence> states{{4}, {4}, {5}, {4}, {5}, {5}};
  EXPECT_EQ(empirical_distribution(states, s, 2), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(empirical_distribution(states, s, 0, 2), (std::vector<double>{1.0 / 3, 2.0 / 3}));
  EXPECT_THROW(empirical_distribution(states, s, 6), ContractError);
  EXPECT_THROW(empirical_distribution(std::vector<Sentence>{{6}}, s, 0), ContractError);
}

TEST(CorruptSentence, Fractions) {
  const auto fx = fixtures::uniform3();
  const Sentence x{4, 4, 4, 4, 4, 4, 4, 4, 4, 4};
  Rng rng(1);
  EXPECT_EQ(corrupt_sentence(x, 0.0, rng, *fx.vocab), x);
  int changed_any = 0;
  for (int k = 0; k < 200; ++k) {
    const auto y = corrupt_sentence(x, 0.1, rng, *fx.vocab);
    ASSERT_EQ(y.size(), x.size());
    const auto diff = token_edit_distance(x, y);
    EXPECT_LE(diff, 1u);
    changed_any += diff > 0;
    const auto z = corrupt_sentence(x, 0.25, rng, *fx.vocab);  // ceil(2.5) = 3 positions
    std::size_t dz = 0;
    for (std::size_t i = 0; i < x.size(); ++i) dz += z[i] != x[i];
    EXPECT_LE(dz, 3u);
    for (TokenId id : z) EXPECT_FALSE(Vocabulary::is_special(id));
  }
  // A redrawn position keeps its word with probability 1/3.
  EXPECT_NEAR(changed_any / 200.0, 2.0 / 3.0, 0.12);
  EXPECT_THROW(corrupt_sentence(x, 1.5, rng, *fx.vocab), ContractError);
}

}  // namespace
}  // namespace cgmh
