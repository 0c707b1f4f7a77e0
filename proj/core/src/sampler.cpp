#include "cgmh/sampler.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cgmh/error.hpp"
#include "cgmh/eval.hpp"

namespace cgmh {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void SamplerConfig::validate() const {
  ops.validate();
  if (top_k == 0) throw ContractError("sampler: top_k must be >= 1");
  if (burn_in > max_steps) throw ContractError("sampler: burn_in must not exceed max_steps");
  if (thinning == 0) throw ContractError("sampler: thinning must be >= 1");
  if (max_len == 0) throw ContractError("sampler: max_len must be >= 1");
  if (likelihood_floor && !(*likelihood_floor >= 0.0 && *likelihood_floor <= 1.0)) {
    throw ContractError("sampler: likelihood floor must be in [0, 1]");
  }
}

ProposalConfig SamplerConfig::proposal_config() const {
  ProposalConfig p;
  p.ops = ops;
  p.top_k = top_k;
  p.exact = exact;
  p.max_len = max_len;
  p.protect_keywords = protect_keywords;
  return p;
}

double acceptance(const Proposal& p, double logpi_x, double logpi_x_new, bool exact) {
  if (!std::isfinite(logpi_x)) throw ContractError("acceptance: current state is off the support");
  if (!p.feasible || logpi_x_new == kNegInf) return 0.0;
  if (p.kind == OpKind::kReplace && !exact) return 1.0;
  if (p.log_g_rev == kNegInf) return 0.0;
  const double log_ratio = logpi_x_new + p.log_g_rev - logpi_x - p.log_g_fwd;
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

StepResult step(const Sentence& state, double log_score, const SamplerConfig& cfg,
                const ProposalConfig& pcfg, const Target& target, Rng& rng) {
  const Proposal p = propose(state, rng, pcfg, target);
  StepRecord rec;
  rec.kind = p.kind;
  rec.feasible = p.feasible;
  rec.acceptance = acceptance(p, log_score, p.result_logscore, cfg.exact);
  const double u = rng.uniform();
  bool accept = u < rec.acceptance;
  if (accept && cfg.likelihood_floor) {
    if (p.result_logscore - log_score < std::log(*cfg.likelihood_floor)) {
      accept = false;
      rec.floored = true;
    }
  }
  rec.accepted = accept;
  if (accept) return {p.result, p.result_logscore, rec};
  return {state, log_score, rec};
}

ChainTrace run_chain(const Sentence& x0, const SamplerConfig& cfg, const Target& target,
                     const CandidateAugmenter& augmenter) {
  cfg.validate();
  check_sentence(x0, cfg.max_len);
  const double s0 = target.logscore(x0);
  if (s0 == kNegInf) {
    throw ContractError(
        "run_chain: the initial state violates a hard constraint (for keyword tasks start from a "
        "sentence that contains every keyword)");
  }
  auto pcfg = cfg.proposal_config();
  pcfg.augmenter = augmenter;

  Rng rng(cfg.seed);
  ChainTrace trace;
  trace.states.reserve(cfg.max_steps + 1);
  trace.log_scores.reserve(cfg.max_steps + 1);
  trace.records.reserve(cfg.max_steps);
  trace.states.push_back(x0);
  trace.log_scores.push_back(s0);
  Sentence cur = x0;
  double cur_score = s0;
  for (std::size_t t = 1; t <= cfg.max_steps; ++t) {
    auto r = step(cur, cur_score, cfg, pcfg, target, rng);
    auto& c = trace.counters[static_cast<std::size_t>(r.record.kind)];
    ++c.proposed;
    if (r.record.accepted) ++c.accepted;
    cur = std::move(r.state);
    cur_score = r.log_score;
    trace.states.push_back(cur);
    trace.log_scores.push_back(cur_score);
    trace.records.push_back(r.record);
  }
  return trace;
}

Selection select_output(const ChainTrace& trace, const SelectionRule& rule, const NGramModel* lm,
                        const Sentence* original) {
  if (trace.states.empty()) throw ContractError("select_output: empty trace");
  const std::size_t last = trace.states.size() - 1;
  switch (rule.kind) {
    case SelectionKind::kSampleAtStep: {
      if (rule.step > last) {
        throw ContractError("select_output: trace has " + std::to_string(last) +
                            " steps, rule needs step " + std::to_string(rule.step));
      }
      return {trace.states[rule.step], rule.step, true};
    }
    case SelectionKind::kMinNllAfter: {
      if (!lm) throw ContractError("select_output: min-NLL rule needs a language model");
      if (rule.step > last) throw ContractError("select_output: trace shorter than the NLL window start");
      std::size_t best = rule.step;
      double best_nll = std::numeric_limits<double>::infinity();
      for (std::size_t t = rule.step; t <= last; ++t) {
        const double nll = lm->per_token_nll(trace.states[t]);
        if (nll < best_nll) {
          best_nll = nll;
          best = t;
        }
      }
      return {trace.states[best], best, true};
    }
    case SelectionKind::kFirstBelowBleuOri: {
      if (!original) throw ContractError("select_output: BLEU-ori rule needs the original sentence");
      std::size_t lowest = 0;
      double lowest_bleu = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t <= last; ++t) {
        const double b = bleu_ori(trace.states[t], *original);
        if (b < rule.threshold) return {trace.states[t], t, true};
        if (b < lowest_bleu) {
          lowest_bleu = b;
          lowest = t;
        }
      }
      return {trace.states[lowest], lowest, false};
    }
  }
  throw ContractError("select_output: unknown rule");
}

}  // namespace cgmh
