#include "cgmh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cgmh/error.hpp"

namespace cgmh {

namespace {

using NgramCounts = std::map<std::vector<TokenId>, double>;

NgramCounts count_ngrams(const Sentence& s, std::size_t n) {
  NgramCounts out;
  if (s.size() < n) return out;
  const auto ids = s.ids();
  for (std::size_t i = 0; i + n <= ids.size(); ++i) {
    out[std::vector<TokenId>(ids.begin() + static_cast<std::ptrdiff_t>(i),
                             ids.begin() + static_cast<std::ptrdiff_t>(i + n))] += 1.0;
  }
  return out;
}

double intersect(const NgramCounts& a, const NgramCounts& b) {
  double total = 0.0;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    if (it != b.end()) total += std::min(c, it->second);
  }
  return total;
}

double closest_ref_length(double cand_len, std::span<const Sentence> refs) {
  double best = static_cast<double>(refs[0].size());
  for (const auto& r : refs) {
    const double len = static_cast<double>(r.size());
    const double d = std::abs(len - cand_len), bd = std::abs(best - cand_len);
    if (d < bd || (d == bd && len < best)) best = len;
  }
  return best;
}

void check_order(int order) {
  if (order < 1) throw ContractError("BLEU order must be >= 1");
}

}  // namespace

NgramStats& NgramStats::operator+=(const NgramStats& o) {
  if (o.matched.size() != matched.size()) throw ContractError("NgramStats: order mismatch");
  for (std::size_t i = 0; i < matched.size(); ++i) {
    matched[i] += o.matched[i];
    total[i] += o.total[i];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

NgramStats bleu_stats(const Sentence& candidate, std::span<const Sentence> references, int max_order) {
  check_order(max_order);
  if (candidate.empty()) throw ContractError("bleu: empty candidate");
  if (references.empty()) throw ContractError("bleu: at least one reference is required");
  NgramStats st(max_order);
  st.candidate_length = static_cast<double>(candidate.size());
  st.reference_length = closest_ref_length(st.candidate_length, references);
  for (int n = 1; n <= max_order; ++n) {
    const auto cand = count_ngrams(candidate, static_cast<std::size_t>(n));
    NgramCounts max_ref;
    for (const auto& r : references) {
      for (const auto& [g, c] : count_ngrams(r, static_cast<std::size_t>(n))) {
        auto& m = max_ref[g];
        m = std::max(m, c);
      }
    }
    const auto i = static_cast<std::size_t>(n - 1);
    st.matched[i] = intersect(cand, max_ref);
    st.total[i] = static_cast<double>(candidate.size() >= static_cast<std::size_t>(n)
                                          ? candidate.size() - static_cast<std::size_t>(n) + 1
                                          : 0);
  }
  return st;
}

double bleu_from_stats(const NgramStats& st, const BleuConfig& cfg) {
  double log_sum = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < st.matched.size(); ++i) {
    if (st.total[i] <= 0.0) continue;
    const double p = st.matched[i] > 0.0 ? st.matched[i] / st.total[i] : cfg.epsilon;
    log_sum += std::log(p);
    ++used;
  }
  if (used == 0 || st.candidate_length <= 0.0) return 0.0;
  const double log_bp = std::min(0.0, 1.0 - st.reference_length / st.candidate_length);
  return 100.0 * std::exp(log_bp + log_sum / used);
}

double bleu(const Sentence& candidate, std::span<const Sentence> references, const BleuConfig& cfg) {
  return bleu_from_stats(bleu_stats(candidate, references, cfg.max_order), cfg);
}

double corpus_bleu(std::span<const Sentence> candidates,
                   std::span<const std::vector<Sentence>> references, const BleuConfig& cfg) {
  if (candidates.size() != references.size()) throw ContractError("corpus_bleu: size mismatch");
  if (candidates.empty()) throw ContractError("corpus_bleu: empty corpus");
  NgramStats total(cfg.max_order);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    total += bleu_stats(candidates[i], references[i], cfg.max_order);
  }
  return bleu_from_stats(total, cfg);
}

double bleu_ref(const Sentence& candidate, std::span<const Sentence> gold, const BleuConfig& cfg) {
  return bleu(candidate, gold, cfg);
}

double bleu_ori(const Sentence& candidate, const Sentence& original, const BleuConfig& cfg) {
  return bleu(candidate, std::span<const Sentence>(&original, 1), cfg);
}

NgramStats gleu_stats(const Sentence& candidate, const Sentence& source, const Sentence& reference,
                      int max_order) {
  check_order(max_order);
  if (candidate.empty()) throw ContractError("gleu: empty candidate");
  NgramStats st(max_order);
  st.candidate_length = static_cast<double>(candidate.size());
  st.reference_length = static_cast<double>(reference.size());
  for (int n = 1; n <= max_order; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const auto h = count_ngrams(candidate, un);
    const auto s = count_ngrams(source, un);
    const auto r = count_ngrams(reference, un);
    NgramCounts source_only;
    for (const auto& [g, c] : s) {
      if (!r.contains(g)) source_only[g] = c;
    }
    const auto i = un - 1;
    st.matched[i] = std::max(intersect(h, r) - intersect(h, source_only), 0.0);
    st.total[i] = static_cast<double>(candidate.size() >= un ? candidate.size() - un + 1 : 0);
  }
  return st;
}

double gleu(const Sentence& candidate, const Sentence& source, std::span<const Sentence> references,
            const BleuConfig& cfg) {
  if (references.empty()) throw ContractError("gleu: at least one reference is required");
  double sum = 0.0;
  for (const auto& r : references) {
    sum += bleu_from_stats(gleu_stats(candidate, source, r, cfg.max_order), cfg);
  }
  return sum / static_cast<double>(references.size());
}

double corpus_gleu(std::span<const Sentence> candidates, std::span<const Sentence> sources,
                   std::span<const std::vector<Sentence>> references, const BleuConfig& cfg) {
  if (candidates.size() != sources.size() || candidates.size() != references.size()) {
    throw ContractError("corpus_gleu: size mismatch");
  }
  if (candidates.empty()) throw ContractError("corpus_gleu: empty corpus");
  std::size_t rounds = 0;
  for (const auto& refs : references) {
    if (refs.empty()) throw ContractError("corpus_gleu: sentence without references");
    rounds = std::max(rounds, refs.size());
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < rounds; ++j) {
    NgramStats total(cfg.max_order);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& refs = references[i];
      total += gleu_stats(candidates[i], sources[i], refs[j % refs.size()], cfg.max_order);
    }
    sum += bleu_from_stats(total, cfg);
  }
  return sum / static_cast<double>(rounds);
}

double corpus_nll(const NGramModel& model, std::span<const Sentence> sentences) {
  if (sentences.empty()) throw ContractError("corpus_nll: no sentences");
  double nll = 0.0, tokens = 0.0;
  for (const auto& s : sentences) {
    nll -= model.seq_logprob(s);
    tokens += static_cast<double>(s.size() + 1);
  }
  return nll / tokens;
}

}  // namespace cgmh
