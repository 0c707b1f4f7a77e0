#include "cgmh/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "cgmh/error.hpp"

namespace cgmh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();

std::vector<TokenId> padded(std::span<const TokenId> ids, Direction direction) {
  std::vector<TokenId> out;
  out.reserve(ids.size() + 2);
  out.push_back(Vocabulary::kBos);
  if (direction == Direction::kForward) {
    out.insert(out.end(), ids.begin(), ids.end());
  } else {
    out.insert(out.end(), ids.rbegin(), ids.rend());
  }
  out.push_back(Vocabulary::kEos);
  return out;
}

bool is_outcome(TokenId id) { return id != Vocabulary::kBos && id != Vocabulary::kPhd; }

}  // namespace

std::size_t NGramModel::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto id : k.ids) {
    h ^= id;
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

NGramModel::NGramModel(std::shared_ptr<const Vocabulary> vocab, int order, Direction direction)
    : vocab_(std::move(vocab)), order_(order), direction_(direction) {
  if (!vocab_) throw ContractError("NGramModel: null vocabulary");
  if (order < 1 || order > kMaxOrder) {
    throw ContractError("NGramModel: order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
  unigram_logprob_.assign(vocab_->size(), kNegInf);
  unigram_backoff_.assign(vocab_->size(), 0.0);
  unigram_successors_.assign(vocab_->size(), {});
  tables_.resize(static_cast<std::size_t>(order - 1));
}

NGramModel::Key NGramModel::make_key(std::span<const TokenId> ids) {
  Key k;
  k.ids.fill(kNoToken);
  std::copy(ids.begin(), ids.end(), k.ids.begin());
  return k;
}

const NGramModel::Entry* NGramModel::find(std::span<const TokenId> ngram) const {
  if (ngram.size() < 2 || ngram.size() > static_cast<std::size_t>(order_)) return nullptr;
  const auto& table = tables_[ngram.size() - 2];
  auto it = table.find(make_key(ngram));
  return it == table.end() ? nullptr : &it->second;
}

double NGramModel::log_backoff(std::span<const TokenId> context) const {
  if (context.empty()) return 0.0;
  if (context.size() == 1) return unigram_backoff_[context[0]];
  const Entry* e = find(context);
  return e ? e->log_backoff : 0.0;
}

double NGramModel::stored_logprob(std::span<const TokenId> context, TokenId word) const {
  std::array<TokenId, kMaxOrder> buf{};
  std::copy(context.begin(), context.end(), buf.begin());
  buf[context.size()] = word;
  const Entry* e = find(std::span<const TokenId>(buf.data(), context.size() + 1));
  return e && !e->phantom ? e->log_prob : std::numeric_limits<double>::quiet_NaN();
}

double NGramModel::cond_logprob(std::span<const TokenId> context, TokenId word) const {
  if (word >= unigram_logprob_.size()) throw ContractError("cond_logprob: token id out of range");
  const auto max_ctx = static_cast<std::size_t>(order_ - 1);
  if (context.size() > max_ctx) context = context.subspan(context.size() - max_ctx);
  double acc = 0.0;
  for (std::size_t len = context.size(); len >= 1; --len) {
    auto h = context.subspan(context.size() - len);
    const double lp = stored_logprob(h, word);
    if (!std::isnan(lp)) return acc + lp;
    acc += log_backoff(h);
  }
  return acc + unigram_logprob_[word];
}

void NGramModel::cond_dist(std::span<const TokenId> context, std::vector<double>& out) const {
  const auto max_ctx = static_cast<std::size_t>(order_ - 1);
  if (context.size() > max_ctx) context = context.subspan(context.size() - max_ctx);
  const std::size_t L = context.size();

  // suffix[j] = sum of log backoffs of the contexts of length j..L.
  std::array<double, kMaxOrder + 1> suffix{};
  double run = 0.0;
  for (std::size_t j = L; j >= 1; --j) {
    run += log_backoff(context.subspan(L - j));
    suffix[j] = run;
  }
  const double base_shift = L >= 1 ? suffix[1] : 0.0;

  const std::size_t V = unigram_logprob_.size();
  out.resize(V);
  const double scale = std::exp(base_shift);
  for (std::size_t w = 0; w < V; ++w) out[w] = unigram_prob_[w] * scale;

  for (std::size_t j = 1; j <= L; ++j) {
    auto h = context.subspan(L - j);
    const double shift = j + 1 <= L ? suffix[j + 1] : 0.0;
    const std::vector<TokenId>* succ = nullptr;
    const std::vector<double>* prob = nullptr;
    if (j == 1) {
      succ = &unigram_successors_[h[0]];
      prob = &unigram_successor_prob_[h[0]];
    } else if (const Entry* e = find(h)) {
      succ = &e->successors;
      prob = &e->successor_prob;
    }
    if (!succ) continue;
    const double f = std::exp(shift);
    for (std::size_t i = 0; i < succ->size(); ++i) out[(*succ)[i]] = (*prob)[i] * f;
  }
  out[Vocabulary::kBos] = 0.0;
  out[Vocabulary::kPhd] = 0.0;
}

std::vector<double> NGramModel::cond_dist(std::span<const TokenId> context) const {
  std::vector<double> out;
  cond_dist(context, out);
  return out;
}

double NGramModel::seq_logprob(std::span<const TokenId> sentence) const {
  const auto toks = padded(sentence, direction_);
  double total = 0.0;
  const auto ctx_len = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const std::size_t start = i > ctx_len ? i - ctx_len : 0;
    total += cond_logprob(std::span<const TokenId>(toks.data() + start, i - start), toks[i]);
  }
  return total;
}

double NGramModel::prefix_logprob(std::span<const TokenId> tokens) const {
  std::vector<TokenId> toks;
  toks.reserve(tokens.size() + 1);
  toks.push_back(Vocabulary::kBos);
  toks.insert(toks.end(), tokens.begin(), tokens.end());
  double total = 0.0;
  const auto ctx_len = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const std::size_t start = i > ctx_len ? i - ctx_len : 0;
    total += cond_logprob(std::span<const TokenId>(toks.data() + start, i - start), toks[i]);
  }
  return total;
}

double NGramModel::per_token_nll(const Sentence& s) const {
  return -seq_logprob(s) / static_cast<double>(s.size() + 1);
}

std::size_t NGramModel::ngram_count(int n) const {
  if (n < 1 || n > order_) return 0;
  if (n == 1) {
    std::size_t c = 0;
    for (std::size_t w = 0; w < unigram_logprob_.size(); ++w) {
      if (w == Vocabulary::kBos || std::isfinite(unigram_logprob_[w])) ++c;
    }
    return c;
  }
  const auto& t = tables_[static_cast<std::size_t>(n - 2)];
  return static_cast<std::size_t>(
      std::count_if(t.begin(), t.end(), [](const auto& kv) { return !kv.second.phantom; }));
}

void NGramModel::finalize() {
  unigram_prob_.resize(unigram_logprob_.size());
  for (std::size_t w = 0; w < unigram_logprob_.size(); ++w) unigram_prob_[w] = std::exp(unigram_logprob_[w]);
  using Succ = std::vector<std::pair<TokenId, double>>;
  std::vector<Succ> uni(unigram_logprob_.size());
  std::vector<std::unordered_map<Key, Succ, KeyHash>> higher(tables_.size());
  // Phantom contexts are created below; collect first so the tables are stable.
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    const std::size_t n = j + 2;
    std::vector<Key> missing;
    for (const auto& [k, e] : tables_[j]) {
      if (e.phantom) continue;
      const TokenId w = k.ids[n - 1];
      if (n == 2) {
        uni[k.ids[0]].emplace_back(w, std::exp(e.log_prob));
      } else {
        Key ctx = k;
        ctx.ids[n - 1] = kNoToken;
        if (!tables_[j - 1].contains(ctx)) missing.push_back(ctx);
        higher[j - 1][ctx].emplace_back(w, std::exp(e.log_prob));
      }
    }
    // Context without its own entry: give it one with unit backoff so the
    // successor can be reached from cond_dist.
    for (const Key& ctx : missing) tables_[j - 1].try_emplace(ctx, Entry{kNegInf, 0.0, {}, {}, true});
  }
  auto store = [](Succ& list, std::vector<TokenId>& ids, std::vector<double>& probs) {
    std::sort(list.begin(), list.end());
    ids.clear();
    probs.clear();
    ids.reserve(list.size());
    probs.reserve(list.size());
    for (const auto& [w, p] : list) {
      ids.push_back(w);
      probs.push_back(p);
    }
  };
  unigram_successors_.assign(unigram_logprob_.size(), {});
  unigram_successor_prob_.assign(unigram_logprob_.size(), {});
  for (std::size_t w = 0; w < uni.size(); ++w) store(uni[w], unigram_successors_[w], unigram_successor_prob_[w]);
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    for (auto& [k, e] : tables_[j]) {
      auto it = higher[j].find(k);
      if (it == higher[j].end()) {
        e.successors.clear();
        e.successor_prob.clear();
      } else {
        store(it->second, e.successors, e.successor_prob);
      }
    }
  }
}

NGramModel NGramModel::uniform(std::shared_ptr<const Vocabulary> vocab, int order,
                               Direction direction) {
  NGramModel m(std::move(vocab), order, direction);
  const double lp = -std::log(static_cast<double>(m.vocab_->content_size() + 1));
  m.unigram_logprob_[Vocabulary::kEos] = lp;
  for (auto id : m.vocab_->content_ids()) m.unigram_logprob_[id] = lp;
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// Training

class NGramTrainer {
 public:
  NGramTrainer(NGramModel& model, const SmoothingConfig& cfg) : m_(model), cfg_(cfg) {}

  void run(std::span<const Sentence> corpus) {
    const auto order = static_cast<std::size_t>(m_.order_);
    const std::size_t V = m_.vocab_->size();
    counts_.assign(order, {});
    for (const auto& s : corpus) {
      for (auto id : s) {
        if (id >= V) throw ContractError("train: token id outside vocabulary");
        if (id == Vocabulary::kBos || id == Vocabulary::kEos || id == Vocabulary::kPhd) {
          throw ContractError("train: corpus sentence contains a special boundary token");
        }
      }
      const auto toks = padded(s.ids(), m_.direction_);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        for (std::size_t n = 1; n <= order && n <= i + 1; ++n) {
          const std::size_t start = i + 1 - n;
          ++counts_[n - 1][NGramModel::make_key(
              std::span<const TokenId>(toks.data() + start, n))];
        }
      }
    }
    if (counts_[0].empty()) throw DataError("train: corpus is empty");

    if (cfg_.method == Smoothing::kKneserNey) apply_continuation_counts();

    // outcome count m: everything except BOS and PHD.
    outcomes_ = static_cast<double>(V - 2);
    train_unigrams();
    m_.finalize();
    for (std::size_t n = 2; n <= order; ++n) {
      train_order(n);
      m_.finalize();
    }
  }

 private:
  using CountMap = std::unordered_map<NGramModel::Key, double, NGramModel::KeyHash>;

  void apply_continuation_counts() {
    const auto order = counts_.size();
    for (std::size_t n = 1; n < order; ++n) {
      CountMap modified;
      // Grams starting with BOS have no left extension: keep raw counts.
      for (const auto& [k, c] : counts_[n - 1]) {
        if (k.ids[0] == Vocabulary::kBos) modified[k] = c;
      }
      for (const auto& [k, c] : counts_[n]) {
        NGramModel::Key suffix;
        suffix.ids.fill(kNoToken);
        std::copy(k.ids.begin() + 1, k.ids.begin() + static_cast<std::ptrdiff_t>(n) + 1,
                  suffix.ids.begin());
        modified[suffix] += 1.0;
      }
      counts_[n - 1] = std::move(modified);
    }
  }

  double discount_for(std::size_t n) const {
    if (cfg_.discount >= 0.0) {
      if (cfg_.discount <= 0.0 || cfg_.discount >= 1.0) {
        throw ContractError("train: Kneser-Ney discount must be in (0, 1)");
      }
      return cfg_.discount;
    }
    double n1 = 0, n2 = 0;
    for (const auto& [k, c] : counts_[n - 1]) {
      if (c == 1.0) ++n1;
      if (c == 2.0) ++n2;
    }
    if (n1 == 0 || n2 == 0) return 0.5;
    return std::clamp(n1 / (n1 + 2.0 * n2), 0.1, 0.9);
  }

  void train_unigrams() {
    const std::size_t V = m_.vocab_->size();
    std::vector<double> c(V, 0.0);
    double total = 0.0;
    for (const auto& [k, cnt] : counts_[0]) {
      if (!is_outcome(k.ids[0])) continue;
      c[k.ids[0]] = cnt;
      total += cnt;
    }
    if (cfg_.method == Smoothing::kAddK) {
      if (cfg_.add_k <= 0.0) throw ContractError("train: add_k must be > 0");
      const double denom = total + cfg_.add_k * outcomes_;
      for (TokenId w = 0; w < V; ++w) {
        if (is_outcome(w)) m_.unigram_logprob_[w] = std::log((c[w] + cfg_.add_k) / denom);
      }
    } else {
      const double d = discount_for(1);
      double seen = 0;
      for (TokenId w = 0; w < V; ++w) {
        if (is_outcome(w) && c[w] > 0) ++seen;
      }
      const double uniform_mass = d * seen / total / outcomes_;
      for (TokenId w = 0; w < V; ++w) {
        if (is_outcome(w)) {
          m_.unigram_logprob_[w] = std::log(std::max(c[w] - d, 0.0) / total + uniform_mass);
        }
      }
    }
    m_.unigram_logprob_[Vocabulary::kBos] = kNegInf;
  }

  void train_order(std::size_t n) {
    // Group n-grams by context in a deterministic order.
    std::map<std::vector<TokenId>, std::vector<std::pair<TokenId, double>>> by_context;
    for (const auto& [k, cnt] : counts_[n - 1]) {
      std::vector<TokenId> h(k.ids.begin(), k.ids.begin() + static_cast<std::ptrdiff_t>(n) - 1);
      by_context[h].emplace_back(k.ids[n - 1], cnt);
    }
    const bool kn = cfg_.method == Smoothing::kKneserNey;
    const double d = kn ? discount_for(n) : 0.0;
    auto& table = m_.tables_[n - 2];
    for (auto& [h, succ] : by_context) {
      std::sort(succ.begin(), succ.end());
      double ch = 0.0;
      for (const auto& [w, cnt] : succ) ch += cnt;
      const auto lower_ctx = std::span<const TokenId>(h).subspan(1);
      const double s = static_cast<double>(succ.size());

      double seen_mass = 0.0;
      double seen_lower = 0.0;
      std::vector<double> probs;
      probs.reserve(succ.size());
      const double gamma = kn ? d * s / ch : 0.0;
      for (const auto& [w, cnt] : succ) {
        const double lower = std::exp(m_.cond_logprob(lower_ctx, w));
        seen_lower += lower;
        double p;
        if (kn) {
          p = (cnt - d) / ch + gamma * lower;
        } else {
          p = (cnt + cfg_.add_k) / (ch + cfg_.add_k * outcomes_);
        }
        probs.push_back(p);
        seen_mass += p;
      }
      double log_bow;
      if (kn) {
        log_bow = std::log(gamma);
      } else {
        const double left = cfg_.add_k * (outcomes_ - s) / (ch + cfg_.add_k * outcomes_);
        double den = 1.0 - seen_lower;
        if (den < 1e-9) den = unseen_lower_mass(lower_ctx, succ);
        log_bow = (left <= 0.0 || den <= 0.0) ? 0.0 : std::log(left / den);
      }
      for (std::size_t i = 0; i < succ.size(); ++i) {
        std::vector<TokenId> gram = h;
        gram.push_back(succ[i].first);
        table[NGramModel::make_key(gram)] = NGramModel::Entry{std::log(probs[i]), 0.0, {}, {}, false};
      }
      set_backoff(h, log_bow);
    }
  }

  double unseen_lower_mass(std::span<const TokenId> lower_ctx,
                           const std::vector<std::pair<TokenId, double>>& succ) const {
    const auto dist = m_.cond_dist(lower_ctx);
    double mass = 0.0;
    std::size_t j = 0;
    for (TokenId w = 0; w < dist.size(); ++w) {
      while (j < succ.size() && succ[j].first < w) ++j;
      if (j < succ.size() && succ[j].first == w) continue;
      mass += dist[w];
    }
    return mass;
  }

  void set_backoff(const std::vector<TokenId>& h, double log_bow) {
    if (h.size() == 1) {
      m_.unigram_backoff_[h[0]] = log_bow;
      return;
    }
    auto& table = m_.tables_[h.size() - 2];
    auto it = table.find(NGramModel::make_key(h));
    if (it == table.end()) throw ContractError("train: context missing from lower-order table");
    it->second.log_backoff = log_bow;
  }

  NGramModel& m_;
  SmoothingConfig cfg_;
  std::vector<CountMap> counts_;
  double outcomes_ = 0.0;
};

NGramModel NGramModel::train(std::span<const Sentence> corpus,
                             std::shared_ptr<const Vocabulary> vocab, int order,
                             Direction direction, const SmoothingConfig& smoothing) {
  if (corpus.empty()) throw DataError("train: corpus is empty");
  NGramModel m(std::move(vocab), order, direction);
  NGramTrainer(m, smoothing).run(corpus);
  return m;
}

std::vector<Sentence> tokenize_corpus(std::span<const std::string> lines, const Vocabulary& vocab,
                                      const TokenizeOptions& opts) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    if (split_words(line).empty()) continue;
    out.push_back(tokenize(line, vocab, opts));
  }
  return out;
}

}  // namespace cgmh
