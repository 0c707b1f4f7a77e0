#include "cgmh/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>

#include "cgmh/error.hpp"

namespace cgmh {

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw ContractError("cosine: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) throw ContractError("cosine: zero-norm vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  EmbeddingTable t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<float> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view rest(line);
    auto next_field = [&]() -> std::string_view {
      std::size_t i = 0;
      while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < rest.size() && rest[j] != ' ' && rest[j] != '\t') ++j;
      auto f = rest.substr(i, j - i);
      rest.remove_prefix(j);
      return f;
    };
    const auto word = next_field();
    if (word.empty()) continue;
    row.clear();
    for (auto f = next_field(); !f.empty(); f = next_field()) {
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("embeddings line " + std::to_string(line_no) + ": non-numeric field '" +
                          std::string(f) + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) throw FormatError("embeddings line " + std::to_string(line_no) + ": no vector");
    if (t.dim_ == 0) t.dim_ = row.size();
    if (row.size() != t.dim_) {
      throw FormatError("embeddings line " + std::to_string(line_no) + ": dimension " +
                        std::to_string(row.size()) + " != " + std::to_string(t.dim_));
    }
    double n2 = 0.0;
    for (float v : row) n2 += static_cast<double>(v) * v;
    if (n2 == 0.0) throw FormatError("embeddings line " + std::to_string(line_no) + ": zero vector");
    if (t.index_.contains(std::string(word))) continue;
    t.index_.emplace(std::string(word), t.words_.size());
    t.words_.emplace_back(word);
    t.data_.insert(t.data_.end(), row.begin(), row.end());
    t.norms_.push_back(std::sqrt(n2));
  }
  return t;
}

std::optional<std::size_t> EmbeddingTable::row_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const float>> EmbeddingTable::lookup(std::string_view word) const {
  auto r = row_of(word);
  if (!r) return std::nullopt;
  return row(*r);
}

double max_sim_to_reference(std::string_view word, const Sentence& reference,
                            const Vocabulary& vocab, const EmbeddingTable& table) {
  if (reference.empty()) throw ContractError("max_sim_to_reference: empty reference");
  const auto q = table.lookup(word);
  if (!q) return table.oov_similarity();
  bool any = false;
  double best = -1.0;
  for (auto id : reference) {
    const auto r = table.lookup(vocab.token(id));
    if (!r) continue;
    any = true;
    best = std::max(best, cosine(*q, *r));
  }
  return any ? best : table.oov_similarity();
}

}  // namespace cgmh
