#pragma once

#include <span>
#include <vector>

#include "cgmh/ngram.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh {

struct BleuConfig {
  int max_order = 4;
  /// Stand-in precision for orders with no matches.
  double epsilon = 1e-9;
};

/// Clipped n-gram counts for one candidate; additive across a corpus.
struct NgramStats {
  std::vector<double> matched;
  std::vector<double> total;
  double candidate_length = 0.0;
  double reference_length = 0.0;

  explicit NgramStats(int order = 4) : matched(static_cast<std::size_t>(order), 0.0), total(static_cast<std::size_t>(order), 0.0) {}
  NgramStats& operator+=(const NgramStats& o);
};

NgramStats bleu_stats(const Sentence& candidate, std::span<const Sentence> references, int max_order);

/// Geometric mean of the n-gram precisions times the brevity penalty, in
/// [0, 100]. Orders where the candidate has no n-grams are left out, so
/// bleu(x, {x}) == 100 for any length.
double bleu_from_stats(const NgramStats& stats, const BleuConfig& cfg = {});

/// Sentence-level BLEU. Throws ContractError on an empty candidate or no references.
double bleu(const Sentence& candidate, std::span<const Sentence> references, const BleuConfig& cfg = {});
double corpus_bleu(std::span<const Sentence> candidates,
                   std::span<const std::vector<Sentence>> references, const BleuConfig& cfg = {});

double bleu_ref(const Sentence& candidate, std::span<const Sentence> gold, const BleuConfig& cfg = {});
double bleu_ori(const Sentence& candidate, const Sentence& original, const BleuConfig& cfg = {});

/// GLEU statistics against one reference: matches with the reference minus
/// matches with source n-grams the reference does not contain.
NgramStats gleu_stats(const Sentence& candidate, const Sentence& source, const Sentence& reference,
                      int max_order);

/// Sentence GLEU in [0, 100], averaged over the references.
double gleu(const Sentence& candidate, const Sentence& source, std::span<const Sentence> references,
            const BleuConfig& cfg = {});

/// Corpus GLEU: for reference index j, sentence i uses reference j mod |R_i|;
/// the result is averaged over j.
double corpus_gleu(std::span<const Sentence> candidates, std::span<const Sentence> sources,
                   std::span<const std::vector<Sentence>> references, const BleuConfig& cfg = {});

/// Token-weighted mean per-token NLL (EOS counted).
double corpus_nll(const NGramModel& model, std::span<const Sentence> sentences);

}  // namespace cgmh
