#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgmh/constraints.hpp"
#include "cgmh/embeddings.hpp"
#include "cgmh/ngram.hpp"
#include "cgmh/sampler.hpp"

namespace cgmh {

/// Read-only models shared by every chain of a run.
struct Models {
  std::shared_ptr<const NGramModel> forward;
  std::shared_ptr<const NGramModel> backward;
  std::shared_ptr<const EmbeddingTable> embeddings;  ///< may be null for keywords / none
  StopwordSet stopwords = default_stopwords();

  const Vocabulary& vocab() const { return forward->vocab(); }
  /// Throws DataError when the models are missing or disagree on vocabulary.
  void validate() const;
};

enum class ParaphraseVariant {
  kNone,   ///< language model only
  kKw,     ///< RAKE keywords as a hard constraint
  kKwWva,  ///< keywords times average word-vector match
  kKwWvm,  ///< keywords times minimum word-vector match
  kWva,    ///< soft average match, no keyword factor
  kWvm,    ///< soft minimum match, no keyword factor
};

std::string_view variant_name(ParaphraseVariant v);
/// Accepts none, kw, kw+wva, kw+wvm, wva, wvm. Throws ContractError otherwise.
ParaphraseVariant parse_variant(std::string_view name);

/// Protocol defaults: 200 steps, min NLL over steps >= 100.
SamplerConfig keywords_config();
/// 200 steps, first state with BLEU-ori < 55.
SamplerConfig paraphrase_config();
/// 100 steps, likelihood floor 0.01, the state at step 100.
SamplerConfig correction_config();

struct TaskResult {
  Sentence output;
  std::size_t step = 0;
  bool met = true;
  ChainTrace trace;
};

/// Starts from the keyword sequence itself and keeps every keyword.
/// Throws DataError for keywords outside the vocabulary.
TaskResult task_keywords(std::span<const std::string> keywords, const SamplerConfig& cfg,
                         const Models& models);

/// Starts from x_star. Keywords come from RAKE over x_star.
TaskResult task_paraphrase(const Sentence& x_star, const SamplerConfig& cfg, const Models& models,
                           ParaphraseVariant variant, std::size_t rake_top_k = 2);

/// Average word-vector match over non-stopwords, spelling and inflection
/// candidates added at replacement sites.
TaskResult task_correct(const Sentence& x_star, const SamplerConfig& cfg, const Models& models);

/// The constraint stack each task builds, exposed for inspection.
ConstraintSpec keywords_spec(std::span<const TokenId> keywords, const Models& models);
ConstraintSpec paraphrase_spec(const Sentence& x_star, const Models& models, ParaphraseVariant variant,
                               std::size_t rake_top_k = 2);
ConstraintSpec correction_spec(const Sentence& x_star, const Models& models);

}  // namespace cgmh
