#include "cgmh/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgmh/error.hpp"

namespace cgmh {

bool keyword_indicator(const Sentence& x, std::span<const TokenId> keywords) {
  return std::all_of(keywords.begin(), keywords.end(), [&](TokenId k) { return x.contains(k); });
}

double aggregate_similarities(std::span<const double> sims, MatchMode mode) {
  if (sims.empty()) return kSimilarityFloor;
  if (mode == MatchMode::kMin) return *std::min_element(sims.begin(), sims.end());
  double sum = 0.0;
  for (double s : sims) sum += s;
  return sum / static_cast<double>(sims.size());
}

double match_score_wv(const Sentence& x, const Sentence& reference, const Vocabulary& vocab,
                      const EmbeddingTable& table, MatchMode mode) {
  if (x.empty() || reference.empty()) throw ContractError("match_score_wv: empty sentence");
  std::vector<double> sims;
  sims.reserve(x.size());
  for (auto id : x) {
    const double s = max_sim_to_reference(vocab.token(id), reference, vocab, table);
    sims.push_back(std::clamp(s, kSimilarityFloor, 1.0));
  }
  return aggregate_similarities(sims, mode);
}

ConstraintSpec::ConstraintSpec(std::shared_ptr<const Vocabulary> vocab, std::vector<TokenId> keywords,
                               std::optional<EmbeddingMatch> match, double alpha, double beta)
    : vocab_(std::move(vocab)),
      keywords_(std::move(keywords)),
      match_(std::move(match)),
      alpha_(alpha),
      beta_(beta) {
  if (!vocab_) throw ContractError("ConstraintSpec: null vocabulary");
  if (!(alpha_ > 0.0)) throw ContractError("ConstraintSpec: alpha must be > 0");
  if (!(beta_ >= 0.0)) throw ContractError("ConstraintSpec: beta must be >= 0");
  std::sort(keywords_.begin(), keywords_.end());
  keywords_.erase(std::unique(keywords_.begin(), keywords_.end()), keywords_.end());
  for (auto k : keywords_) {
    if (k >= vocab_->size() || Vocabulary::is_special(k)) {
      throw ContractError("ConstraintSpec: keyword must be a non-special vocabulary word");
    }
  }
  if (match_) {
    if (!match_->table) throw ContractError("ConstraintSpec: embedding match without a table");
    if (match_->reference.empty()) throw ContractError("ConstraintSpec: empty match reference");
    std::sort(match_->ignored.begin(), match_->ignored.end());
    const auto& table = *match_->table;
    for (auto id : match_->reference) {
      auto r = table.row_of(vocab_->token(id));
      if (!r) continue;
      const auto v = table.row(*r);
      const double n = table.norm(*r);
      for (float f : v) ref_unit_.push_back(static_cast<double>(f) / n);
      ++ref_rows_;
    }
  }
}

bool ConstraintSpec::is_ignored(TokenId id) const {
  return match_ && std::binary_search(match_->ignored.begin(), match_->ignored.end(), id);
}

double ConstraintSpec::word_similarity(TokenId id) const {
  if (!match_) return 1.0;
  const auto& table = *match_->table;
  const auto r = table.row_of(vocab_->token(id));
  double best;
  if (!r || ref_rows_ == 0) {
    best = table.oov_similarity();
  } else {
    const auto q = table.row(*r);
    const double qn = table.norm(*r);
    const std::size_t d = table.dim();
    best = -1.0;
    for (std::size_t i = 0; i < ref_rows_; ++i) {
      const double* ref = ref_unit_.data() + i * d;
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += static_cast<double>(q[j]) * ref[j];
      best = std::max(best, dot / qn);
    }
  }
  return std::clamp(best, kSimilarityFloor, 1.0);
}

MatchScore ConstraintSpec::match(const Sentence& x) const {
  MatchScore out;
  out.hard_ok = keyword_indicator(x, keywords_);
  if (!out.hard_ok) {
    out.value = 0.0;
    return out;
  }
  if (match_) {
    std::vector<double> sims;
    sims.reserve(x.size());
    for (auto id : x) {
      if (!is_ignored(id)) sims.push_back(word_similarity(id));
    }
    out.value = aggregate_similarities(sims, match_->mode);
  }
  return out;
}

double stationary_logscore(const Sentence& x, const ConstraintSpec& spec, const NGramModel& lm) {
  const MatchScore m = spec.match(x);
  if (!m.hard_ok) return -std::numeric_limits<double>::infinity();
  return combine_logscore(spec, lm.seq_logprob(x), m.value);
}

}  // namespace cgmh
