#include "cgmh/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgmh/error.hpp"

namespace cgmh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::size_t> eligible_positions(const Sentence& x, const ProposalConfig& cfg,
                                            const ConstraintSpec& spec) {
  std::vector<std::size_t> out;
  out.reserve(x.size());
  const auto kws = spec.keywords();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (cfg.protect_keywords && std::binary_search(kws.begin(), kws.end(), x[i])) continue;
    out.push_back(i);
  }
  return out;
}

bool is_eligible(const Sentence& x, std::size_t pos, const ProposalConfig& cfg,
                 const ConstraintSpec& spec) {
  if (pos >= x.size()) return false;
  if (!cfg.protect_keywords) return true;
  const auto kws = spec.keywords();
  return !std::binary_search(kws.begin(), kws.end(), x[pos]);
}

double log_count(std::size_t n) { return n == 0 ? std::numeric_limits<double>::infinity() : std::log(static_cast<double>(n)); }

double log_or_neginf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

CandidateSet build_candidates(const Sentence& x, Site site, const ProposalConfig& cfg,
                              const Target& target) {
  std::vector<TokenId> extra;
  if (cfg.augmenter && site.kind == OpKind::kReplace) extra = cfg.augmenter(x[site.index]);
  const std::size_t k = cfg.exact ? target.forward.vocab().content_size() : cfg.top_k;
  CandidateSet c = preselect(target.forward, target.backward, x, site, k, extra);
  fill_distribution(x, site, c, target);
  return c;
}

Proposal infeasible(const Sentence& x, OpKind kind, std::size_t index, double log_g_fwd) {
  Proposal p;
  p.kind = kind;
  p.index = index;
  p.feasible = false;
  p.log_g_fwd = log_g_fwd;
  p.log_g_rev = kNegInf;
  p.source = x;
  p.result = x;
  if (kind != OpKind::kInsert && index < x.size()) p.old_word = x[index];
  return p;
}

Proposal finish_replace(const Sentence& x, std::size_t m, const CandidateSet& c, TokenId word,
                        const ProposalConfig& cfg, const Target& target) {
  const double log_pick = std::log(cfg.ops.replace) - log_count(eligible_positions(x, cfg, target.spec).size());
  const auto it = std::find(c.words.begin(), c.words.end(), word);
  if (c.empty_distribution() || it == c.words.end()) return infeasible(x, OpKind::kReplace, m, log_pick);
  const auto idx = static_cast<std::size_t>(it - c.words.begin());
  if (!(c.probs[idx] > 0.0)) return infeasible(x, OpKind::kReplace, m, log_pick);

  Proposal p;
  p.kind = OpKind::kReplace;
  p.index = m;
  p.old_word = x[m];
  p.new_word = word;
  p.source = x;
  p.result = x.with_replaced(m, word);
  p.result_logscore = c.log_scores[idx];
  p.log_g_fwd = log_pick + std::log(c.probs[idx]);

  if (!is_eligible(p.result, m, cfg, target.spec)) {
    p.log_g_rev = kNegInf;
    return p;
  }
  const double log_pick_rev =
      std::log(cfg.ops.replace) - log_count(eligible_positions(p.result, cfg, target.spec).size());
  // The shortlist depends only on the neighbours of m unless an augmenter
  // keys on the current word.
  if (cfg.exact || !cfg.augmenter) {
    p.log_g_rev = log_pick_rev + c.log_prob_of(p.old_word);
  } else {
    const auto rev = build_candidates(p.result, Site{OpKind::kReplace, m}, cfg, target);
    p.log_g_rev = log_pick_rev + rev.log_prob_of(p.old_word);
  }
  return p;
}

Proposal finish_insert(const Sentence& x, std::size_t s, const CandidateSet& c, TokenId word,
                       const ProposalConfig& cfg, const Target& target) {
  const double log_pick = std::log(cfg.ops.insert) - std::log(static_cast<double>(x.size() + 1));
  const auto it = std::find(c.words.begin(), c.words.end(), word);
  if (c.empty_distribution() || it == c.words.end()) return infeasible(x, OpKind::kInsert, s, log_pick);
  const auto idx = static_cast<std::size_t>(it - c.words.begin());
  if (!(c.probs[idx] > 0.0)) return infeasible(x, OpKind::kInsert, s, log_pick);

  Proposal p;
  p.kind = OpKind::kInsert;
  p.index = s;
  p.new_word = word;
  p.source = x;
  p.result = x.with_inserted(s, word);
  p.result_logscore = c.log_scores[idx];
  p.log_g_fwd = log_pick + std::log(c.probs[idx]);
  p.log_g_rev = is_eligible(p.result, s, cfg, target.spec)
                    ? std::log(cfg.ops.del) - log_count(eligible_positions(p.result, cfg, target.spec).size())
                    : kNegInf;
  return p;
}

Proposal finish_delete(const Sentence& x, std::size_t m, const ProposalConfig& cfg, const Target& target) {
  const double log_pick = std::log(cfg.ops.del) - log_count(eligible_positions(x, cfg, target.spec).size());
  Proposal p;
  p.kind = OpKind::kDelete;
  p.index = m;
  p.old_word = x[m];
  p.source = x;
  p.result = x.with_erased(m);
  p.result_logscore = target.logscore(p.result);
  p.log_g_fwd = log_pick;
  const auto rev = build_candidates(p.result, Site{OpKind::kInsert, m}, cfg, target);
  p.log_g_rev = std::log(cfg.ops.insert) - std::log(static_cast<double>(p.result.size() + 1)) +
                rev.log_prob_of(p.old_word);
  return p;
}

}  // namespace

std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::kReplace: return "replace";
    case OpKind::kInsert: return "insert";
    case OpKind::kDelete: return "delete";
  }
  return "?";
}

double OpProbabilities::of(OpKind k) const {
  switch (k) {
    case OpKind::kReplace: return replace;
    case OpKind::kInsert: return insert;
    case OpKind::kDelete: return del;
  }
  return 0.0;
}

void OpProbabilities::validate() const {
  if (insert < 0 || del < 0 || replace < 0) throw ContractError("operation probabilities must be >= 0");
  if (std::abs(insert + del + replace - 1.0) > 1e-9) {
    throw ContractError("operation probabilities must sum to 1");
  }
}

double CandidateSet::log_prob_of(TokenId w) const {
  const auto it = std::find(words.begin(), words.end(), w);
  if (it == words.end() || probs.empty()) return kNegInf;
  return log_or_neginf(probs[static_cast<std::size_t>(it - words.begin())]);
}

CandidateSet preselect(const NGramModel& fwd, const NGramModel& bwd, const Sentence& x, Site site,
                       std::size_t top_k, std::span<const TokenId> extra) {
  if (top_k == 0) throw ContractError("preselect: K must be >= 1");
  if (fwd.vocab().size() != bwd.vocab().size()) {
    throw ContractError("preselect: forward and backward models use different vocabularies");
  }
  const std::size_t n = x.size();
  std::size_t left_end, right_begin;
  if (site.kind == OpKind::kReplace) {
    if (site.index >= n) throw ContractError("preselect: position out of range");
    left_end = site.index;
    right_begin = site.index + 1;
  } else {
    if (site.index > n) throw ContractError("preselect: slot out of range");
    left_end = site.index;
    right_begin = site.index;
  }

  const auto& vocab = fwd.vocab();
  const std::size_t V = vocab.size();
  CandidateSet out;
  if (top_k >= vocab.content_size()) {
    out.words = vocab.content_ids();
    out.provenance = Provenance::kFullVocab;
    return out;
  }

  const auto ids = x.ids();
  const auto left = ids.subspan(0, left_end);
  std::vector<TokenId> right_rev(ids.begin() + static_cast<std::ptrdiff_t>(right_begin), ids.end());
  std::reverse(right_rev.begin(), right_rev.end());

  auto context_of = [](std::span<const TokenId> gen, int order) {
    std::vector<TokenId> ctx;
    ctx.push_back(Vocabulary::kBos);
    ctx.insert(ctx.end(), gen.begin(), gen.end());
    const auto keep = static_cast<std::size_t>(order - 1);
    if (ctx.size() > keep) ctx.erase(ctx.begin(), ctx.end() - static_cast<std::ptrdiff_t>(keep));
    return ctx;
  };
  const double cf = fwd.prefix_logprob(left);
  const double cb = bwd.prefix_logprob(right_rev);
  // Scratch reused across calls; these are vocabulary-sized.
  thread_local std::vector<double> pf, pb, q;
  thread_local std::vector<TokenId> pool;
  fwd.cond_dist(context_of(left, fwd.order()), pf);
  bwd.cond_dist(context_of(right_rev, bwd.order()), pb);
  const double shift = std::max(cf, cb);
  const double sf = std::exp(cf - shift);
  const double sb = std::exp(cb - shift);

  q.assign(V, 0.0);
  pool.clear();
  pool.reserve(vocab.content_size());
  for (TokenId w = Vocabulary::kNumSpecials; w < V; ++w) {
    q[w] = std::min(pf[w] * sf, pb[w] * sb);
    pool.push_back(w);
  }
  auto better = [&](TokenId a, TokenId b) { return q[a] != q[b] ? q[a] > q[b] : a < b; };
  const auto k = std::min(top_k, pool.size());
  std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k) - 1, pool.end(), better);
  std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), better);

  out.words.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  out.provenance = Provenance::kTopK;
  for (TokenId e : extra) {
    if (e >= V || Vocabulary::is_special(e)) continue;
    if (std::find(out.words.begin(), out.words.end(), e) != out.words.end()) continue;
    out.words.push_back(e);
    out.provenance = Provenance::kAugmented;
  }
  out.log_q.reserve(out.words.size());
  for (TokenId w : out.words) out.log_q.push_back(log_or_neginf(q[w]) + shift);
  return out;
}

void fill_distribution(const Sentence& x, Site site, CandidateSet& c, const Target& target) {
  const auto& spec = target.spec;
  std::vector<TokenId> buf(x.begin(), x.end());
  std::size_t pos = site.index;
  if (site.kind == OpKind::kInsert) {
    buf.insert(buf.begin() + static_cast<std::ptrdiff_t>(pos), Vocabulary::kPhd);
  } else if (pos >= buf.size()) {
    throw ContractError("fill_distribution: position out of range");
  }

  // Keywords already satisfied by the words around the site.
  const auto kws = spec.keywords();
  std::vector<char> covered(kws.size(), 0);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (i == pos) continue;
    const auto it = std::lower_bound(kws.begin(), kws.end(), buf[i]);
    if (it != kws.end() && *it == buf[i]) covered[static_cast<std::size_t>(it - kws.begin())] = 1;
  }

  std::vector<double> other_sims;
  if (spec.has_match()) {
    other_sims.assign(buf.size(), 0.0);
    for (std::size_t i = 0; i < buf.size(); ++i) {
      if (i != pos && !spec.is_ignored(buf[i])) other_sims[i] = spec.word_similarity(buf[i]);
    }
  }
  const MatchMode mode = spec.has_match() ? spec.embed_match()->mode : MatchMode::kMin;

  c.log_scores.assign(c.words.size(), kNegInf);
  std::vector<double> sims;
  for (std::size_t j = 0; j < c.words.size(); ++j) {
    const TokenId w = c.words[j];
    bool ok = true;
    for (std::size_t i = 0; i < kws.size(); ++i) {
      if (!covered[i] && kws[i] != w) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    buf[pos] = w;
    double value = 1.0;
    if (spec.has_match()) {
      sims.clear();
      for (std::size_t i = 0; i < buf.size(); ++i) {
        if (i == pos) {
          if (!spec.is_ignored(w)) sims.push_back(spec.word_similarity(w));
        } else if (!spec.is_ignored(buf[i])) {
          sims.push_back(other_sims[i]);
        }
      }
      value = aggregate_similarities(sims, mode);
    }
    c.log_scores[j] = combine_logscore(spec, target.forward.seq_logprob(buf), value);
  }

  double top = kNegInf;
  for (double s : c.log_scores) top = std::max(top, s);
  c.probs.assign(c.words.size(), 0.0);
  if (top == kNegInf) {
    c.log_normalizer = kNegInf;
    return;
  }
  double sum = 0.0;
  for (double s : c.log_scores) sum += std::exp(s - top);
  c.log_normalizer = top + std::log(sum);
  for (std::size_t j = 0; j < c.words.size(); ++j) c.probs[j] = std::exp(c.log_scores[j] - c.log_normalizer);
}

CandidateSet replacement_dist(const Sentence& x, std::size_t m, CandidateSet candidates,
                              const Target& target) {
  if (m >= x.size()) throw ContractError("replacement_dist: position out of range");
  fill_distribution(x, Site{OpKind::kReplace, m}, candidates, target);
  return candidates;
}

Proposal make_proposal(const Sentence& x, OpKind kind, std::size_t index, TokenId word,
                       const ProposalConfig& cfg, const Target& target) {
  const std::size_t n = x.size();
  switch (kind) {
    case OpKind::kReplace: {
      if (index >= n) throw ContractError("make_proposal: position out of range");
      const double log_pick = std::log(cfg.ops.replace) - log_count(eligible_positions(x, cfg, target.spec).size());
      if (!is_eligible(x, index, cfg, target.spec)) return infeasible(x, kind, index, log_pick);
      const auto c = build_candidates(x, Site{kind, index}, cfg, target);
      return finish_replace(x, index, c, word, cfg, target);
    }
    case OpKind::kInsert: {
      if (index > n) throw ContractError("make_proposal: slot out of range");
      if (n + 1 > cfg.max_len) {
        return infeasible(x, kind, index, std::log(cfg.ops.insert) - std::log(static_cast<double>(n + 1)));
      }
      const auto c = build_candidates(x, Site{kind, index}, cfg, target);
      return finish_insert(x, index, c, word, cfg, target);
    }
    case OpKind::kDelete: {
      if (index >= n) throw ContractError("make_proposal: position out of range");
      const double log_pick = std::log(cfg.ops.del) - log_count(eligible_positions(x, cfg, target.spec).size());
      if (n == 1 || !is_eligible(x, index, cfg, target.spec)) return infeasible(x, kind, index, log_pick);
      return finish_delete(x, index, cfg, target);
    }
  }
  throw ContractError("make_proposal: unknown operation");
}

Proposal propose(const Sentence& x, Rng& rng, const ProposalConfig& cfg, const Target& target) {
  if (x.empty()) throw ContractError("propose: empty state");
  const double weights[3] = {cfg.ops.insert, cfg.ops.del, cfg.ops.replace};
  const OpKind kinds[3] = {OpKind::kInsert, OpKind::kDelete, OpKind::kReplace};
  const OpKind kind = kinds[rng.categorical(weights)];
  const std::size_t n = x.size();

  switch (kind) {
    case OpKind::kReplace: {
      const auto elig = eligible_positions(x, cfg, target.spec);
      if (elig.empty()) return infeasible(x, kind, 0, std::log(cfg.ops.replace));
      const std::size_t m = elig[rng.index(elig.size())];
      const auto c = build_candidates(x, Site{kind, m}, cfg, target);
      if (c.empty_distribution()) {
        return infeasible(x, kind, m, std::log(cfg.ops.replace) - log_count(elig.size()));
      }
      const TokenId w = c.words[rng.categorical(c.probs)];
      return finish_replace(x, m, c, w, cfg, target);
    }
    case OpKind::kInsert: {
      const std::size_t s = rng.index(n + 1);
      const double log_pick = std::log(cfg.ops.insert) - std::log(static_cast<double>(n + 1));
      if (n + 1 > cfg.max_len) return infeasible(x, kind, s, log_pick);
      const auto c = build_candidates(x, Site{kind, s}, cfg, target);
      if (c.empty_distribution()) return infeasible(x, kind, s, log_pick);
      const TokenId w = c.words[rng.categorical(c.probs)];
      return finish_insert(x, s, c, w, cfg, target);
    }
    case OpKind::kDelete: {
      const auto elig = eligible_positions(x, cfg, target.spec);
      if (elig.empty()) return infeasible(x, kind, 0, std::log(cfg.ops.del));
      const std::size_t m = elig[rng.index(elig.size())];
      if (n == 1) return infeasible(x, kind, m, std::log(cfg.ops.del) - log_count(elig.size()));
      return finish_delete(x, m, cfg, target);
    }
  }
  throw ContractError("propose: unknown operation");
}

Sentence apply(const Sentence& x, const Proposal& p) {
  if (x != p.source) throw ContractError("apply: proposal was built for a different state");
  if (!p.feasible) return x;
  Sentence out;
  switch (p.kind) {
    case OpKind::kReplace: out = x.with_replaced(p.index, p.new_word); break;
    case OpKind::kInsert: out = x.with_inserted(p.index, p.new_word); break;
    case OpKind::kDelete: out = x.with_erased(p.index); break;
  }
  if (out != p.result) throw ContractError("apply: stored result is inconsistent with the operation");
  return out;
}

Proposal inverse_of(const Proposal& p, const ProposalConfig& cfg, const Target& target) {
  if (!p.feasible) throw ContractError("inverse_of: infeasible proposal has no inverse");
  switch (p.kind) {
    case OpKind::kReplace: return make_proposal(p.result, OpKind::kReplace, p.index, p.old_word, cfg, target);
    case OpKind::kInsert: return make_proposal(p.result, OpKind::kDelete, p.index, Vocabulary::kPhd, cfg, target);
    case OpKind::kDelete: return make_proposal(p.result, OpKind::kInsert, p.index, p.old_word, cfg, target);
  }
  throw ContractError("inverse_of: unknown operation");
}

}  // namespace cgmh
