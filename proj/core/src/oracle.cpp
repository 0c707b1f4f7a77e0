#include "cgmh/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "cgmh/error.hpp"

namespace cgmh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalized weights pi~(x with w at the site) over `words`; all zero when
// every completion is off the support.
std::vector<double> site_conditional(const Sentence& x, OpKind kind, std::size_t index,
                                     std::span<const TokenId> words, const Target& target) {
  std::vector<double> logw(words.size(), kNegInf);
  double top = kNegInf;
  for (std::size_t k = 0; k < words.size(); ++k) {
    const Sentence y = kind == OpKind::kReplace ? x.with_replaced(index, words[k]) : x.with_inserted(index, words[k]);
    logw[k] = target.logscore(y);
    top = std::max(top, logw[k]);
  }
  std::vector<double> p(words.size(), 0.0);
  if (top == kNegInf) return p;
  double sum = 0.0;
  for (double l : logw) sum += std::exp(l - top);
  for (std::size_t k = 0; k < words.size(); ++k) p[k] = std::exp(logw[k] - top) / sum;
  return p;
}

double prob_of(std::span<const TokenId> words, std::span<const double> probs, TokenId w) {
  const auto it = std::find(words.begin(), words.end(), w);
  return it == words.end() ? 0.0 : probs[static_cast<std::size_t>(it - words.begin())];
}

double mh_accept(double logpi_x, double logpi_y, double g_fwd, double g_rev) {
  if (logpi_y == kNegInf || g_rev <= 0.0) return 0.0;
  const double r = logpi_y + std::log(g_rev) - logpi_x - std::log(g_fwd);
  return r >= 0.0 ? 1.0 : std::exp(r);
}

}  // namespace

MicroSpace::MicroSpace(std::vector<TokenId> words, std::size_t max_len)
    : words_(std::move(words)), max_len_(max_len) {
  if (words_.empty()) throw DataError("micro space needs at least one word");
  if (max_len_ == 0) throw DataError("micro space needs max_len >= 1");
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  const std::size_t v = words_.size();
  std::size_t total = 0, layer = 1;
  for (std::size_t len = 1; len <= max_len_; ++len) {
    if (layer > kMaxMicroStates / v) {
      throw DataError("micro space too large: more than " + std::to_string(kMaxMicroStates) + " states");
    }
    layer *= v;
    total += layer;
    if (total > kMaxMicroStates) {
      throw DataError("micro space too large: more than " + std::to_string(kMaxMicroStates) + " states");
    }
  }
  states_.reserve(total);
  for (std::size_t len = 1; len <= max_len_; ++len) {
    std::vector<std::size_t> digits(len, 0);
    while (true) {
      std::vector<TokenId> ids(len);
      for (std::size_t i = 0; i < len; ++i) ids[i] = words_[digits[i]];
      states_.emplace_back(std::move(ids));
      std::size_t i = len;
      while (i > 0 && ++digits[i - 1] == v) digits[--i] = 0;
      if (i == 0) break;
    }
  }
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

std::optional<std::size_t> MicroSpace::index_of(const Sentence& s) const {
  const auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

MicroSpace enumerate_space(const Vocabulary& vocab, std::size_t max_len) {
  return MicroSpace(vocab.content_ids(), max_len);
}

std::vector<double> exact_stationary(const MicroSpace& space, const ConstraintSpec& spec,
                                     const NGramModel& lm) {
  std::vector<double> logp(space.size());
  double top = kNegInf;
  for (std::size_t i = 0; i < space.size(); ++i) {
    logp[i] = stationary_logscore(space.state(i), spec, lm);
    top = std::max(top, logp[i]);
  }
  if (top == kNegInf) throw DataError("exact_stationary: no state has positive probability");
  std::vector<double> p(space.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logp[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double SparseKernel::at(std::size_t i, std::size_t j) const {
  const auto& r = rows_.at(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j, [](const auto& e, std::size_t c) { return e.first < c; });
  return it != r.end() && it->first == j ? it->second : 0.0;
}

SparseKernel exact_kernel(const MicroSpace& space, const OpProbabilities& ops, const Target& target) {
  ops.validate();
  const auto words = space.words();
  SparseKernel kernel(space.size());

  for (std::size_t i = 0; i < space.size(); ++i) {
    const Sentence& x = space.state(i);
    const std::size_t n = x.size();
    const double lp = target.logscore(x);
    std::map<std::size_t, double> row;
    double diag = 0.0;
    if (lp == kNegInf) {
      // The chain never visits zero-mass states; keep the row stochastic.
      kernel.row(i) = {{i, 1.0}};
      continue;
    }
    auto move = [&](const Sentence& y, double lp_y, double mass, double g_fwd, double g_rev) {
      const double a = mh_accept(lp, lp_y, g_fwd, g_rev);
      const auto j = space.index_of(y);
      if (!j) throw ContractError("exact_kernel: move leaves the enumerated space");
      row[*j] += mass * a;
      diag += mass * (1.0 - a);
    };

    // Replace: position uniform, word from the exact conditional.
    for (std::size_t m = 0; m < n && ops.replace > 0.0; ++m) {
      const double base = ops.replace / static_cast<double>(n);
      const auto q = site_conditional(x, OpKind::kReplace, m, words, target);
      double placed = 0.0;
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (q[k] <= 0.0) continue;
        placed += q[k];
        const Sentence y = x.with_replaced(m, words[k]);
        if (y == x) {
          diag += base * q[k];
          continue;
        }
        const auto q_rev = site_conditional(y, OpKind::kReplace, m, words, target);
        move(y, target.logscore(y), base * q[k], base * q[k], base * prob_of(words, q_rev, x[m]));
      }
      diag += base * (1.0 - placed);
    }

    // Insert: slot uniform over n + 1 gaps.
    if (ops.insert > 0.0) {
      if (n + 1 > space.max_len()) {
        diag += ops.insert;
      } else {
        for (std::size_t s = 0; s <= n; ++s) {
          const double base = ops.insert / static_cast<double>(n + 1);
          const auto q = site_conditional(x, OpKind::kInsert, s, words, target);
          double placed = 0.0;
          for (std::size_t k = 0; k < words.size(); ++k) {
            if (q[k] <= 0.0) continue;
            placed += q[k];
            const Sentence y = x.with_inserted(s, words[k]);
            const double g_rev = ops.del / static_cast<double>(n + 1);
            move(y, target.logscore(y), base * q[k], base * q[k], g_rev);
          }
          diag += base * (1.0 - placed);
        }
      }
    }

    // Delete: position uniform; the reverse re-inserts the word at the same slot.
    if (ops.del > 0.0) {
      if (n == 1) {
        diag += ops.del;
      } else {
        for (std::size_t m = 0; m < n; ++m) {
          const double base = ops.del / static_cast<double>(n);
          const Sentence y = x.with_erased(m);
          const auto q_rev = site_conditional(y, OpKind::kInsert, m, words, target);
          const double g_rev = ops.insert / static_cast<double>(n) * prob_of(words, q_rev, x[m]);
          move(y, target.logscore(y), base, base, g_rev);
        }
      }
    }

    row[i] += diag;
    auto& out = kernel.row(i);
    out.reserve(row.size());
    for (const auto& [j, p] : row) {
      if (p != 0.0 || j == i) out.emplace_back(j, p);
    }
  }
  return kernel;
}

bool strongly_connected(const SparseKernel& kernel, std::span<const char> mask) {
  const std::size_t n = kernel.size();
  if (mask.size() != n) throw ContractError("strongly_connected: mask size mismatch");
  std::vector<std::vector<std::size_t>> rev(n);
  std::size_t start = n, count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    ++count;
    if (start == n) start = i;
    for (const auto& [j, p] : kernel.row(i)) {
      if (p > 0.0 && mask[j]) rev[j].push_back(i);
    }
  }
  if (count == 0) return false;
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      auto visit = [&](std::size_t v) {
        if (!mask[v] || seen[v]) return;
        seen[v] = 1;
        ++visited;
        stack.push_back(v);
      };
      if (forward) {
        for (const auto& [v, p] : kernel.row(u)) {
          if (p > 0.0) visit(v);
        }
      } else {
        for (auto v : rev[u]) visit(v);
      }
    }
    return visited;
  };
  return reach(true) == count && reach(false) == count;
}

KernelAudit audit_kernel(const SparseKernel& kernel, std::span<const double> pi) {
  const std::size_t n = kernel.size();
  if (pi.size() != n) throw ContractError("audit_kernel: size mismatch");
  KernelAudit a;
  std::vector<double> flow(n, 0.0);
  std::vector<char> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& [j, p] : kernel.row(i)) {
      sum += p;
      flow[j] += pi[i] * p;
      a.max_balance_violation = std::max(a.max_balance_violation, std::abs(pi[i] * p - pi[j] * kernel.at(j, i)));
    }
    a.max_row_error = std::max(a.max_row_error, std::abs(sum - 1.0));
    if (pi[i] > 0.0) {
      mask[i] = 1;
      ++a.support_size;
      if (kernel.at(i, i) > 0.0) a.aperiodic = true;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    a.max_stationarity_error = std::max(a.max_stationarity_error, std::abs(flow[j] - pi[j]));
  }
  a.irreducible = strongly_connected(kernel, mask);
  return a;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractError("tv_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

std::vector<double> empirical_distribution(std::span<const Sentence> states, const MicroSpace& space,
                                           std::size_t burn_in, std::size_t thinning) {
  if (thinning == 0) throw ContractError("empirical_distribution: thinning must be >= 1");
  if (burn_in >= states.size()) {
    throw ContractError("empirical_distribution: burn-in leaves no samples");
  }
  std::vector<double> p(space.size(), 0.0);
  std::size_t kept = 0;
  for (std::size_t t = burn_in; t < states.size(); t += thinning) {
    const auto i = space.index_of(states[t]);
    if (!i) throw ContractError("empirical_distribution: state outside the space");
    p[*i] += 1.0;
    ++kept;
  }
  for (double& v : p) v /= static_cast<double>(kept);
  return p;
}

Sentence corrupt_sentence(const Sentence& x, double fraction, Rng& rng, const Vocabulary& vocab) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ContractError("corrupt_sentence: fraction must be in [0, 1]");
  if (vocab.content_size() == 0) throw ContractError("corrupt_sentence: vocabulary has no content words");
  const std::size_t n = x.size();
  const auto k = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TokenId> ids(x.begin(), x.end());
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.index(n - i)]);
    ids[order[i]] = static_cast<TokenId>(Vocabulary::kNumSpecials + rng.index(vocab.content_size()));
  }
  return Sentence(std::move(ids));
}

}  // namespace cgmh
