#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cgmh/constraints.hpp"
#include "cgmh/error.hpp"
#include "cgmh/fixtures.hpp"
#include "test_util.hpp"

namespace cgmh {
namespace {

std::shared_ptr<const EmbeddingTable> table_from(const std::string& text) {
  std::istringstream in(text);
  return std::make_shared<const EmbeddingTable>(EmbeddingTable::load(in));
}

std::vector<std::string> surfaces(const std::vector<TokenId>& ids, const Vocabulary& v) {
  std::vector<std::string> out;
  for (auto id : ids) out.push_back(v.token(id));
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Rake, SingleCandidatePhrase) {
  const auto v = Vocabulary::from_words({"what", "is", "the", "best", "plan"});
  const StopwordSet sw{"what", "is", "the"};
  const auto kw = rake_extract(tokenize("what is the best plan", v), v, sw, 1);
  EXPECT_EQ(surfaces(kw, v), (std::vector<std::string>{"best", "plan"}));
}

TEST(Rake, AllStopwordsGivesNothing) {
  const auto v = Vocabulary::from_words({"what", "is", "the"});
  const StopwordSet sw{"what", "is", "the"};
  EXPECT_TRUE(rake_extract(tokenize("what is the", v), v, sw, 3).empty());
}

TEST(Rake, HandScoredThreePhrases) {
  // Phrases: [deep learning models] [training] [large deep networks]
  // freq:   deep 2, others 1.   degree: deep 6, learning/models/large/networks 3, training 1
  // scores: deep 3, learning 3, models 3, large 3, networks 3, training 1
  // phrase scores: 9, 1, 9 -> tie broken by position.
  const auto v = Vocabulary::from_words(
      {"deep", "learning", "models", "and", "the", "training", "of", "large", "networks"});
  const StopwordSet sw{"and", "the", "of"};
  const auto s = tokenize("deep learning models and the training of large deep networks", v);
  EXPECT_EQ(surfaces(rake_extract(s, v, sw, 1), v), (std::vector<std::string>{"deep", "learning", "models"}));
  EXPECT_EQ(surfaces(rake_extract(s, v, sw, 2), v),
            (std::vector<std::string>{"deep", "large", "learning", "models", "networks"}));
  EXPECT_EQ(surfaces(rake_extract(s, v, sw, 3), v),
            (std::vector<std::string>{"deep", "large", "learning", "models", "networks", "training"}));
}

TEST(Rake, PunctuationAndUnknownDelimitPhrases) {
  const auto v = Vocabulary::from_words({"oil", "price", ",", "rates"});
  const auto kw = rake_extract(tokenize("oil price , zzz rates", v), v, {}, 1);
  EXPECT_EQ(surfaces(kw, v), (std::vector<std::string>{"oil", "price"}));
}

TEST(Rake, ShippedStopwordsCoverCommonWords) {
  const auto& sw = default_stopwords();
  EXPECT_GT(sw.size(), 150u);
  for (const char* w : {"the", "is", "what", "a", "of", "'s"}) EXPECT_TRUE(sw.contains(w)) << w;
  EXPECT_FALSE(sw.contains("best"));
}

TEST(KeywordIndicator, Examples) {
  const std::string text = "but many people have never made the trip .";
  const auto v = build_vocab(std::vector<std::string>{text}, 100);
  const auto x = tokenize(text, v);
  const std::vector<TokenId> kw{*v.find("have"), *v.find("trip")};
  EXPECT_TRUE(keyword_indicator(x, kw));
  EXPECT_FALSE(keyword_indicator(x.with_erased(7), kw));
  EXPECT_TRUE(keyword_indicator(x, {}));
}

const char* kToyTable =
    "dog 1 1 0\n"
    "cat 1 0.8 0.1\n"
    "car 0 0.3 1\n"
    "road 0.1 0.2 1\n"
    "anti -1 -1 0\n";

double brute_cosine(std::vector<double> u, std::vector<double> v) {
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / std::sqrt(nu * nv);
}

TEST(MatchScore, SelfSimilarityIsOne) {
  const auto t = table_from(kToyTable);
  const auto v = Vocabulary::from_words({"dog", "cat", "car"});
  const auto x = tokenize("dog cat car", v);
  EXPECT_NEAR(match_score_wv(x, x, v, *t, MatchMode::kMin), 1.0, 1e-7);
  EXPECT_NEAR(match_score_wv(x, x, v, *t, MatchMode::kAverage), 1.0, 1e-7);
}

TEST(MatchScore, OovWordUnderMin) {
  const auto t = table_from(kToyTable);
  const auto v = Vocabulary::from_words({"dog", "cat", "car", "zebra"});
  const double got = match_score_wv(tokenize("dog zebra", v), tokenize("dog cat", v), v, *t, MatchMode::kMin);
  EXPECT_DOUBLE_EQ(got, std::min(1.0, kDefaultOovSimilarity));
}

TEST(MatchScore, BruteForceGrid) {
  const auto t = table_from(kToyTable);
  const auto v = Vocabulary::from_words({"dog", "cat", "car", "road", "anti"});
  const std::vector<std::vector<double>> xs{{1, 1, 0}, {0.1, 0.2, 1}, {-1, -1, 0}};  // dog road anti
  const std::vector<std::vector<double>> refs{{1, 0.8, 0.1}, {0, 0.3, 1}};         // cat car
  std::vector<double> sims;
  for (const auto& w : xs) {
    double best = -1;
    for (const auto& r : refs) best = std::max(best, brute_cosine(w, r));
    sims.push_back(std::clamp(best, 0.01, 1.0));
  }
  const double mn = *std::min_element(sims.begin(), sims.end());
  const double avg = (sims[0] + sims[1] + sims[2]) / 3.0;
  EXPECT_DOUBLE_EQ(sims[2], 0.01);  // negative cosine clamped
  const auto x = tokenize("dog road anti", v), ref = tokenize("cat car", v);
  EXPECT_NEAR(match_score_wv(x, ref, v, *t, MatchMode::kMin), mn, 1e-7);
  EXPECT_NEAR(match_score_wv(x, ref, v, *t, MatchMode::kAverage), avg, 1e-7);

  const ConstraintSpec spec(std::make_shared<const Vocabulary>(v), {},
                            EmbeddingMatch{MatchMode::kAverage, t, ref, {}});
  EXPECT_NEAR(spec.match(x).value, avg, 1e-7);
}

TEST(StationaryLogscore, KeywordsOnlyEqualsLmScore) {
  const auto fx = fixtures::bigram3();
  const ConstraintSpec spec(fx.vocab, {*fx.vocab->find("b")});
  const auto x = test::S(*fx.vocab, "a b c");
  EXPECT_EQ(stationary_logscore(x, spec, *fx.forward), fx.forward->seq_logprob(x));
  EXPECT_EQ(stationary_logscore(test::S(*fx.vocab, "a c"), spec, *fx.forward),
            -std::numeric_limits<double>::infinity());
}

TEST(StationaryLogscore, NoConstraintsReducesToAlphaLm) {
  const auto fx = fixtures::bigram3();
  const auto x = test::S(*fx.vocab, "c a");
  EXPECT_EQ(stationary_logscore(x, ConstraintSpec(fx.vocab), *fx.forward), fx.forward->seq_logprob(x));
  EXPECT_DOUBLE_EQ(stationary_logscore(x, ConstraintSpec(fx.vocab, {}, std::nullopt, 2.5), *fx.forward),
                   2.5 * fx.forward->seq_logprob(x));
}

TEST(StationaryLogscore, KeywordsTimesWvm) {
  const auto& m = test::toy_models();
  const auto& v = m.vocab();
  const auto ref = tokenize("what 's the best plan to lose weight ?", v);
  const auto x = tokenize("how can i lose weight ?", v);
  EmbeddingMatch em{MatchMode::kMin, m.embeddings, ref, {}};
  const ConstraintSpec spec(m.forward->vocab_ptr(), {*v.find("lose"), *v.find("weight")}, em);
  const double wvm = match_score_wv(x, ref, v, *m.embeddings, MatchMode::kMin);
  EXPECT_NEAR(stationary_logscore(x, spec, *m.forward), m.forward->seq_logprob(x) + std::log(wvm), 1e-9);
}

TEST(StationaryLogscore, ZeroLawMatchesIndicator) {
  const auto fx = fixtures::uniform3();
  const std::vector<TokenId> kw{4, 6};
  const ConstraintSpec spec(fx.vocab, kw);
  for (const auto& x : {Sentence{4}, Sentence{4, 6}, Sentence{6, 5, 4}, Sentence{5, 5}}) {
    EXPECT_EQ(std::isinf(stationary_logscore(x, spec, *fx.forward)), !keyword_indicator(x, kw));
  }
}

TEST(StationaryLogscore, MonotoneInMatchScore) {
  const auto t = table_from(kToyTable);
  auto v = std::make_shared<const Vocabulary>(Vocabulary::from_words({"dog", "cat", "car", "road", "anti"}));
  auto lm = NGramModel::uniform(v, 2);
  const auto ref = tokenize("cat", *v);
  const ConstraintSpec spec(v, {}, EmbeddingMatch{MatchMode::kMin, t, ref, {}});
  // Same length, so the LM factor is equal; WVM: cat 1 > dog > road.
  const auto s_cat = tokenize("cat", *v), s_dog = tokenize("dog", *v), s_road = tokenize("road", *v);
  EXPECT_GT(spec.match(s_cat).value, spec.match(s_dog).value);
  EXPECT_GT(spec.match(s_dog).value, spec.match(s_road).value);
  EXPECT_GT(stationary_logscore(s_cat, spec, lm), stationary_logscore(s_dog, spec, lm));
  EXPECT_GT(stationary_logscore(s_dog, spec, lm), stationary_logscore(s_road, spec, lm));
}

TEST(ConstraintSpec, Validation) {
  auto v = std::make_shared<const Vocabulary>(Vocabulary::from_words({"a"}));
  EXPECT_THROW(ConstraintSpec(v, {}, std::nullopt, 0.0), ContractError);
  EXPECT_THROW(ConstraintSpec(v, {}, std::nullopt, 1.0, -1.0), ContractError);
  EXPECT_THROW(ConstraintSpec(v, {Vocabulary::kUnk}), ContractError);
  EXPECT_THROW(ConstraintSpec(v, {99}), ContractError);
  EXPECT_NO_THROW(ConstraintSpec(v, {4, 4}));
  EXPECT_EQ(ConstraintSpec(v, {4, 4}).keywords().size(), 1u);
}

TEST(ConstraintSpec, IgnoredWordsAreSkipped) {
  const auto t = table_from(kToyTable);
  auto v = std::make_shared<const Vocabulary>(Vocabulary::from_words({"dog", "cat", "car", "road", "anti"}));
  const auto ref = tokenize("cat", *v);
  const ConstraintSpec spec(v, {}, EmbeddingMatch{MatchMode::kAverage, t, ref, {*v->find("anti")}});
  EXPECT_NEAR(spec.match(tokenize("cat anti", *v)).value, 1.0, 1e-7);
  EXPECT_DOUBLE_EQ(spec.match(tokenize("anti", *v)).value, kSimilarityFloor);
}

}  // namespace
}  // namespace cgmh
