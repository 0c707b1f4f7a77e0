#include "cgmh/tasks.hpp"

#include <algorithm>

#include "cgmh/augment.hpp"
#include "cgmh/error.hpp"

namespace cgmh {

namespace {

TaskResult run_task(const Sentence& x0, const SamplerConfig& cfg, const Models& models,
                    const ConstraintSpec& spec, const Sentence* original,
                    const CandidateAugmenter& augmenter = {}) {
  const Target target{*models.forward, *models.backward, spec};
  TaskResult r;
  r.trace = run_chain(x0, cfg, target, augmenter);
  auto sel = select_output(r.trace, cfg.selection, models.forward.get(), original);
  r.output = std::move(sel.sentence);
  r.step = sel.step;
  r.met = sel.met;
  return r;
}

void require_embeddings(const Models& models, std::string_view what) {
  if (!models.embeddings) throw DataError(std::string(what) + " needs an embedding table");
}

}  // namespace

void Models::validate() const {
  if (!forward || !backward) throw DataError("both a forward and a backward language model are required");
  if (forward->direction() != Direction::kForward) throw DataError("forward model has backward direction");
  if (backward->direction() != Direction::kBackward) throw DataError("backward model has forward direction");
  if (!(forward->vocab() == backward->vocab())) {
    throw DataError("forward and backward models were built over different vocabularies");
  }
}

std::string_view variant_name(ParaphraseVariant v) {
  switch (v) {
    case ParaphraseVariant::kNone: return "none";
    case ParaphraseVariant::kKw: return "kw";
    case ParaphraseVariant::kKwWva: return "kw+wva";
    case ParaphraseVariant::kKwWvm: return "kw+wvm";
    case ParaphraseVariant::kWva: return "wva";
    case ParaphraseVariant::kWvm: return "wvm";
  }
  return "?";
}

ParaphraseVariant parse_variant(std::string_view name) {
  for (auto v : {ParaphraseVariant::kNone, ParaphraseVariant::kKw, ParaphraseVariant::kKwWva,
                 ParaphraseVariant::kKwWvm, ParaphraseVariant::kWva, ParaphraseVariant::kWvm}) {
    if (variant_name(v) == name) return v;
  }
  throw ContractError("unknown constraint variant '" + std::string(name) +
                      "' (expected none, kw, kw+wva, kw+wvm, wva or wvm)");
}

SamplerConfig keywords_config() {
  SamplerConfig c;
  c.max_steps = 200;
  c.burn_in = 100;
  c.selection = SelectionRule::min_nll_after(100);
  return c;
}

SamplerConfig paraphrase_config() {
  SamplerConfig c;
  c.max_steps = 200;
  c.burn_in = 0;
  c.selection = SelectionRule::first_below_bleu_ori(55.0);
  return c;
}

SamplerConfig correction_config() {
  SamplerConfig c;
  c.max_steps = 100;
  c.burn_in = 0;
  c.likelihood_floor = 0.01;
  c.selection = SelectionRule::sample_at_step(100);
  return c;
}

ConstraintSpec keywords_spec(std::span<const TokenId> keywords, const Models& models) {
  return ConstraintSpec(models.forward->vocab_ptr(), {keywords.begin(), keywords.end()});
}

ConstraintSpec paraphrase_spec(const Sentence& x_star, const Models& models, ParaphraseVariant variant,
                               std::size_t rake_top_k) {
  const auto& vocab = models.vocab();
  std::vector<TokenId> keywords;
  const bool use_kw = variant == ParaphraseVariant::kKw || variant == ParaphraseVariant::kKwWva ||
                      variant == ParaphraseVariant::kKwWvm;
  if (use_kw) keywords = rake_extract(x_star, vocab, models.stopwords, rake_top_k);

  std::optional<EmbeddingMatch> match;
  if (variant != ParaphraseVariant::kNone && variant != ParaphraseVariant::kKw) {
    require_embeddings(models, "word-vector matching");
    EmbeddingMatch m;
    m.mode = (variant == ParaphraseVariant::kKwWva || variant == ParaphraseVariant::kWva) ? MatchMode::kAverage
                                                                                            : MatchMode::kMin;
    m.table = models.embeddings;
    m.reference = x_star;
    match = std::move(m);
  }
  return ConstraintSpec(models.forward->vocab_ptr(), std::move(keywords), std::move(match));
}

ConstraintSpec correction_spec(const Sentence& x_star, const Models& models) {
  require_embeddings(models, "error correction");
  const auto& vocab = models.vocab();
  EmbeddingMatch m;
  m.mode = MatchMode::kAverage;
  m.table = models.embeddings;
  m.reference = x_star;
  for (const auto& w : models.stopwords) {
    if (auto id = vocab.find(w); id && !Vocabulary::is_special(*id)) m.ignored.push_back(*id);
  }
  std::sort(m.ignored.begin(), m.ignored.end());
  return ConstraintSpec(models.forward->vocab_ptr(), {}, std::move(m));
}

TaskResult task_keywords(std::span<const std::string> keywords, const SamplerConfig& cfg,
                         const Models& models) {
  models.validate();
  if (keywords.empty()) throw DataError("keywords task needs at least one keyword");
  const auto& vocab = models.vocab();
  std::vector<TokenId> ids;
  for (const auto& k : keywords) {
    const auto id = vocab.find(k);
    if (!id || Vocabulary::is_special(*id)) throw DataError("keyword '" + k + "' is not in the vocabulary");
    ids.push_back(*id);
  }
  const Sentence x0(ids);
  const auto spec = keywords_spec(ids, models);
  return run_task(x0, cfg, models, spec, nullptr);
}

TaskResult task_paraphrase(const Sentence& x_star, const SamplerConfig& cfg, const Models& models,
                           ParaphraseVariant variant, std::size_t rake_top_k) {
  models.validate();
  const auto spec = paraphrase_spec(x_star, models, variant, rake_top_k);
  return run_task(x_star, cfg, models, spec, &x_star);
}

TaskResult task_correct(const Sentence& x_star, const SamplerConfig& cfg, const Models& models) {
  models.validate();
  const auto spec = correction_spec(x_star, models);
  return run_task(x_star, cfg, models, spec, &x_star, make_augmenter(models.forward->vocab_ptr()));
}

}  // namespace cgmh
