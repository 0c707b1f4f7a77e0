#pragma once

#include <cmath>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cgmh/embeddings.hpp"
#include "cgmh/ngram.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh {

/// Floor applied to per-word cosine scores before they enter the target.
inline constexpr double kSimilarityFloor = 0.01;

using StopwordSet = std::unordered_set<std::string>;

/// The shipped English list (data/english_stopwords.txt).
const StopwordSet& default_stopwords();
StopwordSet load_stopwords(std::istream& in);

/// RAKE: candidate phrases are maximal runs of words that are neither
/// stopwords, punctuation nor UNK. Word score is degree / frequency, phrase
/// score the sum of its word scores. Returns the distinct word ids of the
/// `top_k` best phrases; ties go to the earlier phrase.
std::vector<TokenId> rake_extract(const Sentence& s, const Vocabulary& vocab,
                                  const StopwordSet& stopwords, std::size_t top_k);

/// 1 iff every keyword occurs in x; vacuously 1 for no keywords.
bool keyword_indicator(const Sentence& x, std::span<const TokenId> keywords);

enum class MatchMode {
  kMin,      ///< WVM
  kAverage,  ///< WVA
};

/// Per-word max cosine against `reference`, clamped to [floor, 1], then
/// aggregated by min or mean.
double match_score_wv(const Sentence& x, const Sentence& reference, const Vocabulary& vocab,
                      const EmbeddingTable& table, MatchMode mode);

/// Aggregation shared by every match-score path so results agree bit for bit.
double aggregate_similarities(std::span<const double> sims, MatchMode mode);

struct EmbeddingMatch {
  MatchMode mode = MatchMode::kMin;
  std::shared_ptr<const EmbeddingTable> table;
  Sentence reference;
  /// Words skipped when scoring x (e.g. stopwords for error correction).
  std::vector<TokenId> ignored;
};

struct MatchScore {
  double value = 1.0;
  bool hard_ok = true;
};

/// The constraint stack of the target distribution:
///   log pi~(x) = alpha * ln p_LM(x) + beta * ln match(x)   if keywords hold,
///   -inf                                                   otherwise.
class ConstraintSpec {
 public:
  ConstraintSpec(std::shared_ptr<const Vocabulary> vocab, std::vector<TokenId> keywords = {},
                 std::optional<EmbeddingMatch> match = std::nullopt, double alpha = 1.0,
                 double beta = 1.0);

  const Vocabulary& vocab() const { return *vocab_; }
  std::span<const TokenId> keywords() const { return keywords_; }
  bool has_match() const { return match_.has_value(); }
  const std::optional<EmbeddingMatch>& embed_match() const { return match_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  bool is_ignored(TokenId id) const;
  /// Clamped max similarity of one word against the reference.
  double word_similarity(TokenId id) const;

  MatchScore match(const Sentence& x) const;

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<TokenId> keywords_;
  std::optional<EmbeddingMatch> match_;
  double alpha_;
  double beta_;
  // Unit-normalized reference vectors, row-major.
  std::vector<double> ref_unit_;
  std::size_t ref_rows_ = 0;
};

/// alpha * lm + beta * ln(match); the single place the two factors are joined.
inline double combine_logscore(const ConstraintSpec& spec, double lm_logprob, double match_value) {
  double score = spec.alpha() * lm_logprob;
  if (spec.has_match()) score += spec.beta() * std::log(match_value);
  return score;
}

/// log pi~(x) or -infinity when a hard constraint fails.
double stationary_logscore(const Sentence& x, const ConstraintSpec& spec, const NGramModel& lm);

}  // namespace cgmh
