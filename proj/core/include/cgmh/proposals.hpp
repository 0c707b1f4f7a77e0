#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cgmh/constraints.hpp"
#include "cgmh/ngram.hpp"
#include "cgmh/random.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh {

enum class OpKind { kReplace = 0, kInsert = 1, kDelete = 2 };

std::string_view op_name(OpKind k);

struct OpProbabilities {
  double insert = 1.0 / 3.0;
  double del = 1.0 / 3.0;
  double replace = 1.0 / 3.0;

  double of(OpKind k) const;
  /// Throws ContractError unless all are >= 0 and they sum to 1 (1e-9).
  void validate() const;
};

/// Extra candidate words for a site, keyed by the word currently there.
using CandidateAugmenter = std::function<std::vector<TokenId>(TokenId current)>;

struct ProposalConfig {
  OpProbabilities ops;
  /// Shortlist size for the pre-selector; ignored when `exact` is set.
  std::size_t top_k = 50;
  /// Use the whole vocabulary as candidate set (no pre-selection).
  bool exact = false;
  std::size_t max_len = 40;
  /// Never replace or delete a keyword occurrence. Breaks exactness.
  bool protect_keywords = false;
  CandidateAugmenter augmenter;
};

/// Where a word is drawn: an existing position (replace) or a gap (insert).
struct Site {
  OpKind kind;          ///< kReplace or kInsert
  std::size_t index;    ///< position m for replace, slot s in [0, n] for insert
};

enum class Provenance { kFullVocab, kTopK, kAugmented };

/// Shortlisted words for one site, with their pre-selector scores and, once
/// filled, the normalized target conditional.
struct CandidateSet {
  std::vector<TokenId> words;
  std::vector<double> log_q;       ///< pre-selector scores (empty in exact mode)
  std::vector<double> log_scores;  ///< log pi~ of the sentence with the word placed
  std::vector<double> probs;       ///< normalized over `words`
  double log_normalizer = -std::numeric_limits<double>::infinity();
  Provenance provenance = Provenance::kFullVocab;

  /// True when every candidate violates a hard constraint.
  bool empty_distribution() const { return !(log_normalizer > -std::numeric_limits<double>::infinity()); }
  /// ln of the normalized probability of `w`, or -inf when absent.
  double log_prob_of(TokenId w) const;
};

/// What the chain samples from: the forward LM scores sentences, the
/// backward LM only helps the pre-selector.
struct Target {
  const NGramModel& forward;
  const NGramModel& backward;
  const ConstraintSpec& spec;

  double logscore(const Sentence& x) const { return stationary_logscore(x, spec, forward); }
};

/// Pre-selector: Q(w) = min(forward prefix prob ending in w, backward
/// suffix prob starting at w). Keeps the top K (ties by lower id), then adds
/// `extra`. With K >= vocabulary content size the result is every content word.
CandidateSet preselect(const NGramModel& fwd, const NGramModel& bwd, const Sentence& x, Site site,
                       std::size_t top_k, std::span<const TokenId> extra = {});

/// Fills `candidates` with the target conditional at `site`: each word is
/// weighted by pi~ of the completed sentence and normalized over the set.
void fill_distribution(const Sentence& x, Site site, CandidateSet& candidates, const Target& target);

/// Replacement conditional at position m (spec'd form of fill_distribution).
CandidateSet replacement_dist(const Sentence& x, std::size_t m, CandidateSet candidates,
                              const Target& target);

struct Proposal {
  OpKind kind = OpKind::kReplace;
  std::size_t index = 0;  ///< position (replace/delete) or slot (insert)
  TokenId old_word = Vocabulary::kPhd;
  TokenId new_word = Vocabulary::kPhd;
  double log_g_fwd = 0.0;
  double log_g_rev = -std::numeric_limits<double>::infinity();
  /// Infeasible proposals (delete from a single word, insert past max_len,
  /// an empty conditional) are emitted but must be rejected.
  bool feasible = true;
  Sentence source;
  Sentence result;
  /// log pi~(result); -inf when infeasible.
  double result_logscore = -std::numeric_limits<double>::infinity();
};

/// Draws one proposal from x.
Proposal propose(const Sentence& x, Rng& rng, const ProposalConfig& cfg, const Target& target);

/// Builds the proposal for a fixed kind, site and word. `word` is ignored for
/// deletions. Used by propose() and by reversibility checks.
Proposal make_proposal(const Sentence& x, OpKind kind, std::size_t index, TokenId word,
                       const ProposalConfig& cfg, const Target& target);

/// Applies p to x. Throws ContractError when p was built for another state.
Sentence apply(const Sentence& x, const Proposal& p);

/// The proposal that undoes p, built from p.result.
Proposal inverse_of(const Proposal& p, const ProposalConfig& cfg, const Target& target);

}  // namespace cgmh
