#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "cgmh/vocab.hpp"

namespace cgmh {

enum class Direction { kForward, kBackward };

enum class Smoothing {
  kAddK,       ///< add-k on observed n-grams, leftover mass backed off (Katz style)
  kKneserNey,  ///< interpolated Kneser-Ney, stored in backoff form
};

struct SmoothingConfig {
  Smoothing method = Smoothing::kAddK;
  double add_k = 0.1;
  /// Absolute discount for Kneser-Ney; negative means estimate per order.
  double discount = -1.0;
};

/// Backoff n-gram language model in ARPA semantics. Probabilities are kept
/// as natural logs. The outcome set is every token except BOS and PHD.
///
/// A backward model is trained on token-reversed sentences; its contexts are
/// given in generation order, i.e. the words that *follow* the predicted one,
/// nearest first.
class NGramModel {
 public:
  static constexpr int kMaxOrder = 6;

  /// Sentences are scored against `vocab`; tokens outside it are UNK.
  static NGramModel train(std::span<const Sentence> corpus, std::shared_ptr<const Vocabulary> vocab,
                          int order, Direction direction, const SmoothingConfig& smoothing = {});

  /// Every context predicts each content word and EOS with equal probability.
  /// UNK gets zero mass.
  static NGramModel uniform(std::shared_ptr<const Vocabulary> vocab, int order,
                            Direction direction = Direction::kForward);

  static NGramModel import_arpa(std::istream& in);
  void export_arpa(std::ostream& out) const;

  int order() const { return order_; }
  Direction direction() const { return direction_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }

  /// ln P(w_1 .. w_n EOS) with the chain rule applied in this model's direction.
  double seq_logprob(std::span<const TokenId> sentence) const;
  double seq_logprob(const Sentence& s) const { return seq_logprob(s.ids()); }

  /// -seq_logprob / (n + 1); EOS counts as a token.
  double per_token_nll(const Sentence& s) const;

  /// ln P(word | context). `context` is in generation order and may begin
  /// with BOS; only its last order-1 tokens matter.
  double cond_logprob(std::span<const TokenId> context, TokenId word) const;

  /// Probability of every vocabulary id given `context`. BOS and PHD are 0.
  std::vector<double> cond_dist(std::span<const TokenId> context) const;
  void cond_dist(std::span<const TokenId> context, std::vector<double>& out) const;

  /// ln P(t_1 .. t_k) for tokens already in generation order, starting
  /// after BOS and without a closing EOS.
  double prefix_logprob(std::span<const TokenId> tokens) const;

  std::size_t ngram_count(int n) const;

 private:
  struct Key {
    std::array<TokenId, kMaxOrder> ids;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  struct Entry {
    double log_prob = 0.0;
    double log_backoff = 0.0;
    std::vector<TokenId> successors;  // words w with (this, w) stored one order up
    std::vector<double> successor_prob;  // exp of the stored log prob, parallel to successors
    bool phantom = false;             // context implied by a longer n-gram, not stored itself
  };
  using Table = std::unordered_map<Key, Entry, KeyHash>;

  NGramModel(std::shared_ptr<const Vocabulary> vocab, int order, Direction direction);

  static Key make_key(std::span<const TokenId> ids);
  const Entry* find(std::span<const TokenId> ngram) const;
  double log_backoff(std::span<const TokenId> context) const;
  double stored_logprob(std::span<const TokenId> context, TokenId word) const;
  /// Rebuilds successor lists and dense caches after the tables change.
  void finalize();

  std::shared_ptr<const Vocabulary> vocab_;
  int order_;
  Direction direction_;
  std::vector<double> unigram_logprob_;
  std::vector<double> unigram_backoff_;
  std::vector<double> unigram_prob_;
  std::vector<std::vector<TokenId>> unigram_successors_;
  std::vector<std::vector<double>> unigram_successor_prob_;
  // tables_[j] holds n-grams of length j + 2 (bigrams at index 0).
  std::vector<Table> tables_;

  friend class NGramTrainer;
  friend class ArpaReader;
};

/// Tokenizes every line against `vocab` (OOV -> UNK).
std::vector<Sentence> tokenize_corpus(std::span<const std::string> lines, const Vocabulary& vocab,
                                      const TokenizeOptions& opts = {});

}  // namespace cgmh
