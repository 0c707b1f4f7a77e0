#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cgmh/vocab.hpp"

namespace cgmh {

/// Similarity assigned to a query word that has no vector.
inline constexpr double kDefaultOovSimilarity = 0.3;

/// Word vectors loaded from GloVe-style text (`word v1 ... vd` per line).
class EmbeddingTable {
 public:
  /// First occurrence of a duplicate word wins. Throws FormatError on ragged
  /// dimensions, non-numeric fields or zero vectors.
  static EmbeddingTable load(std::istream& in);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  std::optional<std::span<const float>> lookup(std::string_view word) const;
  std::optional<std::size_t> row_of(std::string_view word) const;
  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * dim_, dim_};
  }
  /// Euclidean norm of row r.
  double norm(std::size_t r) const { return norms_[r]; }

  double oov_similarity() const { return oov_similarity_; }
  void set_oov_similarity(double s) { oov_similarity_ = s; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
  std::vector<double> norms_;
  double oov_similarity_ = kDefaultOovSimilarity;
};

/// u.v / (|u||v|). Throws ContractError on dimension mismatch or zero norm.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

/// Max cosine between `word` and any reference word that has a vector.
/// Returns the table's OOV similarity when `word` has no vector or no
/// reference word does.
double max_sim_to_reference(std::string_view word, const Sentence& reference,
                            const Vocabulary& vocab, const EmbeddingTable& table);

}  // namespace cgmh
