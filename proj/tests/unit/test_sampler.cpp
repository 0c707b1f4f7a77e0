#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "cgmh/error.hpp"
#include "cgmh/eval.hpp"
#include "cgmh/fixtures.hpp"
#include "cgmh/sampler.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace cgmh {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Proposal fake(OpKind kind, double g_fwd, double g_rev, bool feasible = true) {
  Proposal p;
  p.kind = kind;
  p.log_g_fwd = g_fwd;
  p.log_g_rev = g_rev;
  p.feasible = feasible;
  return p;
}

TEST(Acceptance, Examples) {
  const auto ins = fake(OpKind::kInsert, std::log(0.5), std::log(0.25));
  EXPECT_NEAR(acceptance(ins, -2.0, -3.0, true), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(acceptance(ins, -3.0, -1.0, true), 1.0);
  EXPECT_EQ(acceptance(ins, -2.0, kNegInf, true), 0.0);
  EXPECT_EQ(acceptance(fake(OpKind::kDelete, 0, 0, false), -2.0, -2.0, true), 0.0);
  EXPECT_EQ(acceptance(fake(OpKind::kDelete, std::log(0.2), kNegInf), -2.0, -1.0, true), 0.0);
  EXPECT_THROW(acceptance(ins, kNegInf, -1.0, true), ContractError);
}

TEST(Acceptance, ReplaceInTruncatedModeIsAlwaysAccepted) {
  const auto rep = fake(OpKind::kReplace, std::log(0.9), std::log(0.01));
  EXPECT_EQ(acceptance(rep, -2.0, -9.0, false), 1.0);
  EXPECT_LT(acceptance(rep, -2.0, -9.0, true), 1.0);
  EXPECT_EQ(acceptance(rep, -2.0, kNegInf, false), 0.0);
}

TEST(Acceptance, ExactReplaceIsGibbs) {
  const auto fx = fixtures::bigram3();
  const ConstraintSpec spec(fx.vocab);
  const Target t{*fx.forward, *fx.backward, spec};
  ProposalConfig cfg;
  cfg.exact = true;
  const auto x = test::S(*fx.vocab, "a b c a");
  for (std::size_t m = 0; m < x.size(); ++m) {
    for (TokenId w : {4u, 5u, 6u}) {
      const auto p = make_proposal(x, OpKind::kReplace, m, w, cfg, t);
      EXPECT_NEAR(acceptance(p, t.logscore(x), p.result_logscore, true), 1.0, 1e-12);
    }
  }
}

// Two words whose similarity to the reference "good" is 1 and the 0.01 floor.
struct FloorFixture {
  std::shared_ptr<const Vocabulary> vocab =
      std::make_shared<const Vocabulary>(Vocabulary::from_words({"bad", "good"}));
  NGramModel lm = NGramModel::uniform(vocab, 2);
  NGramModel lm_back = NGramModel::uniform(vocab, 2, Direction::kBackward);
  std::shared_ptr<const EmbeddingTable> table = [] {
    std::istringstream in("good 1 0\nbad 0.001 1\n");
    return std::make_shared<const EmbeddingTable>(EmbeddingTable::load(in));
  }();
  ConstraintSpec spec;
  Target target{lm, lm_back, spec};

  explicit FloorFixture(double beta)
      : spec(vocab, {}, EmbeddingMatch{MatchMode::kMin, table, tokenize("good", *vocab), {}}, 1.0, beta) {}
};

SamplerConfig replace_only(std::optional<double> floor) {
  SamplerConfig c;
  c.ops = {0.0, 0.0, 1.0};
  c.top_k = 1;  // the shortlist is {bad}: lowest id on a uniform LM
  c.max_len = 1;
  c.burn_in = 0;
  c.max_steps = 1;
  c.likelihood_floor = floor;
  return c;
}

TEST(LikelihoodFloor, RejectsBelowThreshold) {
  FloorFixture f(1.5);  // pi ratio 0.01^1.5 = 1e-3
  const auto x = tokenize("good", *f.vocab);
  const double s = f.target.logscore(x);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto cfg = replace_only(0.01);
    const auto r = step(x, s, cfg, cfg.proposal_config(), f.target, rng);
    EXPECT_NEAR(r.record.acceptance, 1.0, 0);
    EXPECT_TRUE(r.record.floored);
    EXPECT_FALSE(r.record.accepted);
    EXPECT_EQ(r.state, x);
  }
  Rng rng(0);
  const auto off = replace_only(std::nullopt);
  const auto r = step(x, s, off, off.proposal_config(), f.target, rng);
  EXPECT_TRUE(r.record.accepted);
  EXPECT_EQ(r.state, tokenize("bad", *f.vocab));
}

TEST(LikelihoodFloor, AcceptsAboveThreshold) {
  FloorFixture f(0.5);  // ratio 0.1
  const auto x = tokenize("good", *f.vocab);
  Rng rng(0);
  const auto cfg = replace_only(0.01);
  const auto r = step(x, f.target.logscore(x), cfg, cfg.proposal_config(), f.target, rng);
  EXPECT_FALSE(r.record.floored);
  EXPECT_TRUE(r.record.accepted);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.burn_in = 300;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.likelihood_floor = 1.5;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.ops = {0.5, 0.5, 0.5};
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(RunChain, TraceShapeAndCounters) {
  const auto fx = fixtures::bigram3();
  const ConstraintSpec spec(fx.vocab);
  const Target t{*fx.forward, *fx.backward, spec};
  SamplerConfig cfg;
  cfg.max_steps = 500;
  cfg.burn_in = 0;
  cfg.exact = true;
  cfg.max_len = 4;
  const auto tr = run_chain(test::S(*fx.vocab, "a"), cfg, t);
  ASSERT_EQ(tr.states.size(), 501u);
  ASSERT_EQ(tr.records.size(), 500u);
  std::size_t proposed = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    EXPECT_NEAR(tr.log_scores[i + 1], t.logscore(tr.states[i + 1]), 1e-9);
    if (!tr.records[i].accepted) EXPECT_EQ(tr.states[i + 1], tr.states[i]);
    EXPECT_LE(tr.states[i + 1].size(), 4u);
  }
  for (auto k : {OpKind::kReplace, OpKind::kInsert, OpKind::kDelete}) proposed += tr.counter(k).proposed;
  EXPECT_EQ(proposed, 500u);
  EXPECT_EQ(tr.counter(OpKind::kReplace).accepted, tr.counter(OpKind::kReplace).proposed);
}

TEST(RunChain, DeterministicPerSeed) {
  const auto& m = test::toy_models();
  const ConstraintSpec spec(m.forward->vocab_ptr());
  const Target t{*m.forward, *m.backward, spec};
  SamplerConfig cfg;
  cfg.max_steps = 100;
  cfg.burn_in = 0;
  cfg.seed = 42;
  const auto x0 = tokenize("how can i save money ?", m.vocab());
  const auto a = run_chain(x0, cfg, t), b = run_chain(x0, cfg, t);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.log_scores, b.log_scores);
  cfg.seed = 43;
  EXPECT_NE(run_chain(x0, cfg, t).states, a.states);
}

TEST(RunChain, OffSupportStartIsAnError) {
  const auto fx = fixtures::uniform3();
  const ConstraintSpec spec(fx.vocab, {5});
  const Target t{*fx.forward, *fx.backward, spec};
  EXPECT_THROW(run_chain(test::S(*fx.vocab, "a c"), SamplerConfig{}, t), ContractError);
}

TEST(RunChain, KeywordsSurviveEveryStep) {
  const auto& m = test::toy_models();
  const auto& v = m.vocab();
  const std::vector<TokenId> kws{*v.find("lottery"), *v.find("scholarships")};
  const ConstraintSpec spec(m.forward->vocab_ptr(), kws);
  const Target t{*m.forward, *m.backward, spec};
  auto cfg = keywords_config();
  cfg.seed = 7;
  const auto tr = run_chain(tokenize("lottery scholarships", v), cfg, t);
  for (const auto& s : tr.states) ASSERT_TRUE(keyword_indicator(s, kws)) << detokenize(s, v);
  const auto sel = select_output(tr, cfg.selection, m.forward.get(), nullptr);
  EXPECT_TRUE(sel.sentence.contains(kws[0]) && sel.sentence.contains(kws[1]));
  EXPECT_GT(sel.sentence.size(), 2u);
}

ChainTrace trace_of(std::vector<Sentence> states) {
  ChainTrace t;
  for (std::size_t i = 0; i < states.size(); ++i) {
    t.log_scores.push_back(0.0);
    if (i) t.records.push_back({});
  }
  t.states = std::move(states);
  return t;
}

TEST(SelectOutput, SampleAtStep) {
  const auto tr = trace_of({{4}, {5}, {6}});
  EXPECT_EQ(select_output(tr, SelectionRule::sample_at_step(2), nullptr, nullptr).sentence, (Sentence{6}));
  EXPECT_THROW(select_output(tr, SelectionRule::sample_at_step(3), nullptr, nullptr), ContractError);
}

TEST(SelectOutput, MinNllAfter) {
  const auto& m = test::toy_models();
  const auto& v = m.vocab();
  std::vector<Sentence> states;
  for (const char* s : {"the the the", "what is the best plan ?", "oil oil", "how can i save money ?",
                        "money the ? in", "what is the best way to save money ?"}) {
    states.push_back(tokenize(s, v));
  }
  const auto tr = trace_of(states);
  std::size_t best = 2;
  for (std::size_t t = 2; t < states.size(); ++t) {
    if (m.forward->per_token_nll(states[t]) < m.forward->per_token_nll(states[best])) best = t;
  }
  const auto sel = select_output(tr, SelectionRule::min_nll_after(2), m.forward.get(), nullptr);
  EXPECT_EQ(sel.step, best);
  EXPECT_NE(best, 1u);
  EXPECT_THROW(select_output(tr, SelectionRule::min_nll_after(2), nullptr, nullptr), ContractError);
}

TEST(SelectOutput, FirstBelowBleuOri) {
  const Sentence orig{10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  std::vector<Sentence> states{orig};
  for (int k = 1; k <= 5; ++k) states.push_back(states.back().with_replaced(static_cast<std::size_t>(10 - k), 99));
  std::vector<double> b;
  for (const auto& s : states) b.push_back(bleu_ori(s, orig));
  for (std::size_t i = 1; i < b.size(); ++i) ASSERT_LT(b[i], b[i - 1]);
  std::size_t first = 0;
  while (b[first] >= 55.0) ++first;
  const auto sel = select_output(trace_of(states), SelectionRule::first_below_bleu_ori(55), nullptr, &orig);
  EXPECT_EQ(sel.step, first);
  EXPECT_TRUE(sel.met);
  EXPECT_LT(b[first], 55.0);
  EXPECT_GE(b[first - 1], 55.0);

  // Never below: the least similar state, flagged as not met.
  const auto miss = select_output(trace_of(states), SelectionRule::first_below_bleu_ori(1.0), nullptr, &orig);
  EXPECT_FALSE(miss.met);
  EXPECT_EQ(miss.step, states.size() - 1);
}

TEST(ProtocolDefaults, PerTask) {
  const auto k = keywords_config();
  EXPECT_EQ(k.max_steps, 200u);
  EXPECT_EQ(k.selection.kind, SelectionKind::kMinNllAfter);
  EXPECT_EQ(k.selection.step, 100u);
  const auto p = paraphrase_config();
  EXPECT_EQ(p.max_steps, 200u);
  EXPECT_EQ(p.selection.kind, SelectionKind::kFirstBelowBleuOri);
  EXPECT_EQ(p.selection.threshold, 55.0);
  const auto c = correction_config();
  EXPECT_EQ(c.max_steps, 100u);
  EXPECT_EQ(c.selection.kind, SelectionKind::kSampleAtStep);
  EXPECT_EQ(c.selection.step, 100u);
  ASSERT_TRUE(c.likelihood_floor);
  EXPECT_EQ(*c.likelihood_floor, 0.01);
  for (const auto& cfg : {k, p, c}) {
    EXPECT_EQ(cfg.top_k, 50u);
    EXPECT_NEAR(cfg.ops.insert, 1.0 / 3.0, 1e-15);
    EXPECT_FALSE(cfg.exact);
  }
}

TEST(TraceJsonl, OneObjectPerState) {
  const auto fx = fixtures::bigram3();
  const ConstraintSpec spec(fx.vocab);
  const Target t{*fx.forward, *fx.backward, spec};
  SamplerConfig cfg;
  cfg.max_steps = 20;
  cfg.burn_in = 0;
  const auto tr = run_chain(test::S(*fx.vocab, "a b"), cfg, t);
  std::ostringstream os;
  write_trace_jsonl(os, tr, *fx.vocab);
  std::istringstream in(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("step").get<std::size_t>(), n);
    EXPECT_EQ(j.at("sentence").get<std::string>(), detokenize(tr.states[n], *fx.vocab));
    if (n == 0) {
      EXPECT_TRUE(j.at("op").is_null());
    } else {
      EXPECT_EQ(j.at("accepted").get<bool>(), tr.records[n - 1].accepted);
      EXPECT_EQ(j.at("op").get<std::string>(), op_name(tr.records[n - 1].kind));
    }
    ++n;
  }
  EXPECT_EQ(n, 21u);
}

}  // namespace
}  // namespace cgmh
