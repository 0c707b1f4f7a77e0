#include <benchmark/benchmark.h>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "cgmh/eval.hpp"
#include "cgmh/ngram.hpp"
#include "cgmh/proposals.hpp"
#include "cgmh/sampler.hpp"

namespace {

using namespace cgmh;

// Zipf-distributed synthetic corpus; built once and shared by every benchmark.
struct World {
  std::shared_ptr<const Vocabulary> vocab;
  NGramModel fwd, bwd;
  Sentence start;

  static World make(std::size_t V, int sentences) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < V; ++i) words.push_back("w" + std::to_string(i));
    auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_words(words));
    Rng rng(7);
    std::vector<double> cdf(V);
    double acc = 0;
    for (std::size_t i = 0; i < V; ++i) cdf[i] = (acc += 1.0 / double(i + 1));
    std::vector<Sentence> corpus;
    for (int n = 0; n < sentences; ++n) {
      std::vector<TokenId> s(5 + rng.index(11));
      for (auto& t : s) {
        const auto r = std::lower_bound(cdf.begin(), cdf.end(), rng.uniform() * acc) - cdf.begin();
        t = static_cast<TokenId>(Vocabulary::kNumSpecials + r);
      }
      corpus.emplace_back(std::move(s));
    }
    auto fwd = NGramModel::train(corpus, vocab, 3, Direction::kForward);
    auto bwd = NGramModel::train(corpus, vocab, 3, Direction::kBackward);
    return World{vocab, std::move(fwd), std::move(bwd), corpus.front()};
  }
};

const World& world() {
  static const World w = World::make(20000, 40000);
  return w;
}

void BM_CondDist(benchmark::State& state) {
  const auto& w = world();
  std::vector<double> out;
  const auto ids = w.start.ids();
  const std::vector<TokenId> ctx{ids[0], ids[1]};
  for (auto _ : state) {
    w.fwd.cond_dist(ctx, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_CondDist);

void BM_Preselect(benchmark::State& state) {
  const auto& w = world();
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto c = preselect(w.fwd, w.bwd, w.start, Site{OpKind::kReplace, 2}, k, {});
    benchmark::DoNotOptimize(c.words.data());
  }
}
BENCHMARK(BM_Preselect)->Arg(10)->Arg(50)->Arg(200);

void BM_Step(benchmark::State& state) {
  const auto& w = world();
  const ConstraintSpec spec(w.vocab);
  const Target target{w.fwd, w.bwd, spec};
  SamplerConfig cfg;
  cfg.top_k = static_cast<std::size_t>(state.range(0));
  const auto pcfg = cfg.proposal_config();
  Rng rng(11);
  Sentence x = w.start;
  double score = target.logscore(x);
  for (auto _ : state) {
    auto r = step(x, score, cfg, pcfg, target, rng);
    x = std::move(r.state);
    score = r.log_score;
  }
}
BENCHMARK(BM_Step)->Arg(50);

void BM_Bleu(benchmark::State& state) {
  Rng rng(3);
  auto sentence = [&] {
    std::vector<TokenId> s(20);
    for (auto& t : s) t = static_cast<TokenId>(Vocabulary::kNumSpecials + rng.index(50));
    return Sentence(std::move(s));
  };
  const Sentence cand = sentence();
  const std::vector<Sentence> refs{sentence(), sentence(), sentence()};
  for (auto _ : state) benchmark::DoNotOptimize(bleu(cand, refs));
}
BENCHMARK(BM_Bleu);

}  // namespace

BENCHMARK_MAIN();
