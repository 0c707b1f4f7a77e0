#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cgmh/constraints.hpp"
#include "cgmh/proposals.hpp"
#include "cgmh/random.hpp"

namespace cgmh {

enum class SelectionKind {
  kMinNllAfter,        ///< lowest per-token NLL among steps >= step
  kFirstBelowBleuOri,  ///< first state whose BLEU against the original is < threshold
  kSampleAtStep,       ///< the state at `step`
};

struct SelectionRule {
  SelectionKind kind = SelectionKind::kMinNllAfter;
  std::size_t step = 100;
  double threshold = 55.0;

  static SelectionRule min_nll_after(std::size_t n) { return {SelectionKind::kMinNllAfter, n, 0.0}; }
  static SelectionRule first_below_bleu_ori(double theta) {
    return {SelectionKind::kFirstBelowBleuOri, 0, theta};
  }
  static SelectionRule sample_at_step(std::size_t n) { return {SelectionKind::kSampleAtStep, n, 0.0}; }
};

struct SamplerConfig {
  OpProbabilities ops;
  std::size_t top_k = 50;
  bool exact = false;
  std::size_t max_steps = 200;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  std::uint64_t seed = 0;
  std::size_t max_len = 40;
  /// Extra rejection when pi~(x')/pi~(x) < floor. Departs from exact MH.
  std::optional<double> likelihood_floor;
  bool protect_keywords = false;
  SelectionRule selection = SelectionRule::min_nll_after(100);

  /// Throws ContractError on an inconsistent configuration.
  void validate() const;
  ProposalConfig proposal_config() const;
};

struct StepRecord {
  OpKind kind = OpKind::kReplace;
  double acceptance = 0.0;
  bool accepted = false;
  bool feasible = true;
  bool floored = false;  ///< rejected by the likelihood floor
};

struct OpCounter {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

/// states[t] and log_scores[t] for t = 0..steps; records[t-1] describes the
/// move that produced states[t].
struct ChainTrace {
  std::vector<Sentence> states;
  std::vector<double> log_scores;
  std::vector<StepRecord> records;
  std::array<OpCounter, 3> counters{};

  std::size_t steps() const { return records.size(); }
  const OpCounter& counter(OpKind k) const { return counters[static_cast<std::size_t>(k)]; }
};

/// min{1, exp(log pi~(x') + log g_rev - log pi~(x) - log g_fwd)}. Zero for
/// infeasible proposals or x' off the support. With `exact` false a
/// replacement is accepted outright.
double acceptance(const Proposal& p, double logpi_x, double logpi_x_new, bool exact);

struct StepResult {
  Sentence state;
  double log_score;
  StepRecord record;
};

StepResult step(const Sentence& state, double log_score, const SamplerConfig& cfg,
                const ProposalConfig& pcfg, const Target& target, Rng& rng);

/// Runs cfg.max_steps MH steps from x0. Throws ContractError when x0 is not
/// on the support of the target.
ChainTrace run_chain(const Sentence& x0, const SamplerConfig& cfg, const Target& target,
                     const CandidateAugmenter& augmenter = {});

struct Selection {
  Sentence sentence;
  std::size_t step = 0;
  bool met = true;
};

/// `lm` is used by kMinNllAfter, `original` by kFirstBelowBleuOri.
Selection select_output(const ChainTrace& trace, const SelectionRule& rule, const NGramModel* lm,
                        const Sentence* original);

/// Writes one JSON object per state: {step, sentence, log_score, op, A, accepted}.
void write_trace_jsonl(std::ostream& out, const ChainTrace& trace, const Vocabulary& vocab);

}  // namespace cgmh
