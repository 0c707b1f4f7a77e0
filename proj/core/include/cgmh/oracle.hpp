#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgmh/constraints.hpp"
#include "cgmh/ngram.hpp"
#include "cgmh/proposals.hpp"
#include "cgmh/random.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh {

/// Upper bound on the number of enumerated states.
inline constexpr std::size_t kMaxMicroStates = 1'000'000;

/// Every sentence of length 1..max_len over a small word list, in
/// lexicographic order of (length, word ids).
class MicroSpace {
 public:
  MicroSpace(std::vector<TokenId> words, std::size_t max_len);

  std::size_t size() const { return states_.size(); }
  std::size_t max_len() const { return max_len_; }
  std::span<const TokenId> words() const { return words_; }
  const Sentence& state(std::size_t i) const { return states_[i]; }
  const std::vector<Sentence>& states() const { return states_; }
  std::optional<std::size_t> index_of(const Sentence& s) const;

 private:
  std::vector<TokenId> words_;
  std::size_t max_len_;
  std::vector<Sentence> states_;
  std::unordered_map<Sentence, std::size_t, SentenceHash> index_;
};

/// All sentences over the content words of `vocab`. Throws DataError when
/// the space would exceed kMaxMicroStates.
MicroSpace enumerate_space(const Vocabulary& vocab, std::size_t max_len);

/// pi over the space, normalized by summation. Throws DataError when no
/// state has positive mass.
std::vector<double> exact_stationary(const MicroSpace& space, const ConstraintSpec& spec,
                                     const NGramModel& lm);

/// Row-sparse transition matrix.
class SparseKernel {
 public:
  using Row = std::vector<std::pair<std::size_t, double>>;  ///< (column, prob), columns ascending

  explicit SparseKernel(std::size_t n) : rows_(n) {}
  std::size_t size() const { return rows_.size(); }
  const Row& row(std::size_t i) const { return rows_[i]; }
  Row& row(std::size_t i) { return rows_[i]; }
  double at(std::size_t i, std::size_t j) const;

 private:
  std::vector<Row> rows_;
};

/// Exact-mode MH kernel built directly from the move definitions and the
/// target, without going through the proposal code: for each operation,
/// position and word it adds g * A to the destination and the rejected
/// remainder to the diagonal.
SparseKernel exact_kernel(const MicroSpace& space, const OpProbabilities& ops, const Target& target);

struct KernelAudit {
  double max_row_error = 0.0;        ///< max |sum_j P_ij - 1|
  double max_balance_violation = 0.0;  ///< max |pi_i P_ij - pi_j P_ji|
  double max_stationarity_error = 0.0;  ///< max |(pi^T P)_j - pi_j|
  bool irreducible = false;          ///< strongly connected on pi > 0
  bool aperiodic = false;            ///< some supported state has P_ii > 0
  std::size_t support_size = 0;
};

KernelAudit audit_kernel(const SparseKernel& kernel, std::span<const double> pi);

/// Strong connectivity of the graph of nonzero entries restricted to `mask`.
bool strongly_connected(const SparseKernel& kernel, std::span<const char> mask);

/// Half the L1 distance. Throws ContractError on length mismatch.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Visit frequencies of states[burn_in], states[burn_in + thinning], ...
/// Throws ContractError when nothing is retained or a state is outside the space.
std::vector<double> empirical_distribution(std::span<const Sentence> states, const MicroSpace& space,
                                           std::size_t burn_in, std::size_t thinning = 1);

/// Replaces ceil(fraction * n) distinct positions with uniform content words.
Sentence corrupt_sentence(const Sentence& x, double fraction, Rng& rng, const Vocabulary& vocab);

}  // namespace cgmh
