#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "cgmh/error.hpp"
#include "cgmh/eval.hpp"
#include "cgmh/fixtures.hpp"
#include "cgmh/oracle.hpp"
#include "cgmh_cli/batch.hpp"
#include "cgmh_cli/cli.hpp"
#include "internal.hpp"

namespace cgmh::cli {

namespace {

TokenizeOptions tok_opts(bool lowercase) { return TokenizeOptions{lowercase}; }

void write_traces(const std::string& dir, const std::vector<TaskResult>& results, const Vocabulary& vocab) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < results.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trace_%05zu.jsonl", i + 1);
    std::ostringstream os;
    write_trace_jsonl(os, results[i].trace, vocab);
    write_file_atomic((std::filesystem::path(dir) / name).string(), os.str());
  }
}

std::string render_outputs(const RunInfo& info, const std::vector<TaskResult>& results, const Vocabulary& vocab) {
  std::ostringstream os;
  os << metadata_header(info);
  for (const auto& r : results) os << detokenize(r.output, vocab) << '\n';
  return os.str();
}

std::vector<Sentence> tokenize_inputs(const std::vector<std::string>& lines, const Vocabulary& vocab,
                                      bool lowercase, std::size_t max_len) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto s = tokenize(lines[i], vocab, tok_opts(lowercase));
    if (s.size() > max_len) {
      throw DataError("input line " + std::to_string(i + 1) + " has " + std::to_string(s.size()) +
                      " tokens, more than --max-len " + std::to_string(max_len));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TokenId> parse_fixture_keywords(const std::string& list, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& w : split_list(list)) {
    const auto id = vocab.find(w);
    if (!id || Vocabulary::is_special(*id)) throw DataError("keyword '" + w + "' is not in the fixture vocabulary");
    ids.push_back(*id);
  }
  return ids;
}

std::vector<std::size_t> parse_checkpoints(const std::string& list, std::size_t steps, std::size_t burn_in) {
  std::vector<std::size_t> cps;
  if (list.empty()) {
    for (std::size_t d : {100, 20, 4, 2, 1}) {
      if (steps / d > burn_in) cps.push_back(steps / d);
    }
  } else {
    for (const auto& s : split_list(list)) {
      std::size_t v = 0;
      try {
        v = std::stoull(s);
      } catch (const std::exception&) {
        throw UsageError("bad checkpoint '" + s + "'");
      }
      if (v <= burn_in || v > steps) throw UsageError("checkpoint " + s + " must lie in (burn-in, steps]");
      cps.push_back(v);
    }
  }
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

void acceptance_table(std::ostream& os, const ChainTrace& trace) {
  std::size_t proposed = 0, accepted = 0;
  for (const auto& c : trace.counters) {
    proposed += c.proposed;
    accepted += c.accepted;
  }
  auto pct = [](const OpCounter& c) { return fmt(100.0 * c.rate(), 1); };
  os << "acceptance\tRep\tAdd\tDel\tMean\n";
  os << "rate_pct\t" << pct(trace.counter(OpKind::kReplace)) << '\t' << pct(trace.counter(OpKind::kInsert)) << '\t'
     << pct(trace.counter(OpKind::kDelete)) << '\t'
     << fmt(proposed ? 100.0 * static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0, 1) << '\n';
  os << "proposed\t" << trace.counter(OpKind::kReplace).proposed << '\t' << trace.counter(OpKind::kInsert).proposed
     << '\t' << trace.counter(OpKind::kDelete).proposed << '\t' << proposed << '\n';
  os << "accepted\t" << trace.counter(OpKind::kReplace).accepted << '\t' << trace.counter(OpKind::kInsert).accepted
     << '\t' << trace.counter(OpKind::kDelete).accepted << '\t' << accepted << '\n';
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void micro_audit(const DiagnoseOptions& o, std::ostream& os) {
  const auto fx = o.words.empty() ? fixtures::by_name(o.fixture) : [&] {
    const auto ws = split_list(o.words);
    return fixtures::uniform_over(ws);
  }();
  const auto keywords = parse_fixture_keywords(o.keywords, *fx.vocab);
  const ConstraintSpec spec(fx.vocab, keywords);
  const Target target{*fx.forward, *fx.backward, spec};
  const auto space = enumerate_space(*fx.vocab, o.max_len);
  const auto pi = exact_stationary(space, spec, *fx.forward);

  SamplerConfig cfg;
  cfg.ops = {o.p_insert, o.p_delete, o.p_replace};
  cfg.exact = true;
  cfg.max_steps = o.steps;
  cfg.burn_in = std::min(o.burn_in, o.steps);
  cfg.seed = o.seed;
  cfg.max_len = o.max_len;
  try {
    cfg.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  if (o.burn_in >= o.steps) throw UsageError("--burn-in must be smaller than --steps");
  const auto checkpoints = parse_checkpoints(o.checkpoints, o.steps, o.burn_in);

  const auto kernel = exact_kernel(space, cfg.ops, target);
  const auto audit = audit_kernel(kernel, pi);

  std::size_t first = 0;
  while (pi[first] <= 0.0) ++first;
  const auto trace = run_chain(space.state(first), cfg, target);

  os << "space\tfixture=" << (o.words.empty() ? o.fixture : "words") << "\twords=" << space.words().size()
     << "\tmax_len=" << space.max_len() << "\tstates=" << space.size() << "\tsupport=" << audit.support_size << '\n';
  os << "kernel\tmax_row_error=" << sci(audit.max_row_error)
     << "\tmax_balance_violation=" << sci(audit.max_balance_violation)
     << "\tmax_stationarity_error=" << sci(audit.max_stationarity_error) << '\n';
  os << "irreducible\t" << (audit.irreducible ? "yes" : "no") << '\n';
  os << "aperiodic\t" << (audit.aperiodic ? "yes" : "no") << '\n';
  for (auto c : checkpoints) {
    const auto emp = empirical_distribution(std::span(trace.states).first(c + 1), space, o.burn_in);
    os << "tv\tstep=" << c << "\tvalue=" << fmt(tv_distance(emp, pi), 6) << '\n';
  }
  acceptance_table(os, trace);
}

struct CorruptRow {
  std::vector<double> bleu_ref, bleu_ori, nll;  // per checkpoint
};

void corruption_experiment(const DiagnoseOptions& o, std::ostream& os) {
  if (o.input.empty()) throw UsageError("--corrupt needs --input (source<TAB>reference... per line)");
  if (o.corrupt_chains == 0) throw UsageError("--corrupt-chains must be >= 1");
  std::vector<double> levels;
  for (const auto& s : split_list(o.corrupt)) {
    double v = 0.0;
    try {
      v = std::stod(s);
    } catch (const std::exception&) {
      throw UsageError("bad corruption level '" + s + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("corruption levels must lie in [0, 1]");
    levels.push_back(v);
  }
  const auto variant = [&] {
    try {
      return parse_variant(o.constraint);
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }();
  const bool needs_emb = variant != ParaphraseVariant::kNone && variant != ParaphraseVariant::kKw;
  const Models models = o.models.load(needs_emb);
  const auto& vocab = models.vocab();

  std::vector<Sentence> sources;
  std::vector<std::vector<Sentence>> refs;
  for (const auto& line : read_input_lines(o.input)) {
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');) cols.push_back(c);
    sources.push_back(tokenize(cols.at(0), vocab, tok_opts(o.models.lowercase)));
    std::vector<Sentence> r;
    for (std::size_t k = 1; k < cols.size(); ++k) {
      if (cols[k].find_first_not_of(' ') != std::string::npos) r.push_back(tokenize(cols[k], vocab, tok_opts(o.models.lowercase)));
    }
    refs.push_back(std::move(r));
  }
  if (sources.empty()) throw DataError("corruption input has no lines");

  SamplerConfig cfg = paraphrase_config();
  cfg.max_steps = o.corrupt_steps;
  cfg.top_k = o.top_k;
  std::vector<std::size_t> checkpoints;
  const std::size_t stride = std::max<std::size_t>(1, o.corrupt_steps / 10);
  for (std::size_t c = 0; c <= o.corrupt_steps; c += stride) checkpoints.push_back(c);
  if (checkpoints.back() != o.corrupt_steps) checkpoints.push_back(o.corrupt_steps);

  const std::size_t per_level = sources.size() * o.corrupt_chains;
  const auto rows = parallel_map<CorruptRow>(levels.size() * per_level, o.threads, [&](std::size_t job) {
    const std::size_t level = job / per_level;
    const std::size_t item = (job % per_level) / o.corrupt_chains;
    const std::size_t rep = job % o.corrupt_chains;
    const std::size_t pair = item * o.corrupt_chains + rep;
    // The same corruption stream and chain seed at every level.
    Rng corrupt_rng(derive_seed(o.seed, 2 * pair));
    const Sentence x0 = corrupt_sentence(sources[item], levels[level], corrupt_rng, vocab);
    const auto spec = paraphrase_spec(sources[item], models, variant);
    const Target target{*models.forward, *models.backward, spec};
    SamplerConfig c = cfg;
    c.seed = derive_seed(o.seed, 2 * pair + 1);
    ChainTrace trace;
    try {
      trace = run_chain(x0, c, target);
    } catch (const ContractError& e) {
      throw DataError("corrupted start for line " + std::to_string(item + 1) +
                      " is off the support of the target; use a soft constraint (wva/wvm/none)");
    }
    CorruptRow row;
    for (auto cp : checkpoints) {
      const auto& s = trace.states[cp];
      row.bleu_ref.push_back(refs[item].empty() ? std::numeric_limits<double>::quiet_NaN() : bleu_ref(s, refs[item]));
      row.bleu_ori.push_back(bleu_ori(s, sources[item]));
      row.nll.push_back(models.forward->per_token_nll(s));
    }
    return row;
  });

  os << "corrupt\tlevel\tstep\tbleu_ref\tbleu_ref_se\tbleu_ori\tnll\n";
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      double br = 0, br2 = 0, bo = 0, nl = 0;
      bool has_ref = true;
      for (std::size_t j = 0; j < per_level; ++j) {
        const auto& r = rows[l * per_level + j];
        if (std::isnan(r.bleu_ref[k])) has_ref = false;
        br += r.bleu_ref[k];
        br2 += r.bleu_ref[k] * r.bleu_ref[k];
        bo += r.bleu_ori[k];
        nl += r.nll[k];
      }
      const double n = static_cast<double>(per_level);
      const double mean = br / n;
      const double var = n > 1 ? std::max(0.0, (br2 - n * mean * mean) / (n - 1)) : 0.0;
      os << "corrupt\t" << fmt(levels[l], 2) << '\t' << checkpoints[k] << '\t'
         << (has_ref ? fmt(mean) : "-") << '\t' << (has_ref ? fmt(std::sqrt(var / n)) : "-") << '\t'
         << fmt(bo / n) << '\t' << fmt(nl / n) << '\n';
    }
  }
}

}  // namespace

int cmd_train_lm(const TrainOptions& o, const RunInfo&, std::ostream& out) {
  if (o.out.empty()) throw UsageError("--out is required");
  Direction dir;
  if (o.direction == "fwd" || o.direction == "forward") {
    dir = Direction::kForward;
  } else if (o.direction == "bwd" || o.direction == "backward") {
    dir = Direction::kBackward;
  } else {
    throw UsageError("--direction must be fwd or bwd");
  }
  SmoothingConfig sm;
  if (o.smoothing == "addk") {
    sm.method = Smoothing::kAddK;
  } else if (o.smoothing == "kn") {
    sm.method = Smoothing::kKneserNey;
  } else {
    throw UsageError("--smoothing must be addk or kn");
  }
  sm.add_k = o.add_k;
  if (!(o.add_k > 0.0)) throw UsageError("--add-k must be > 0");
  if (o.order < 1 || o.order > NGramModel::kMaxOrder) {
    throw UsageError("--order must be in [1, " + std::to_string(NGramModel::kMaxOrder) + "]");
  }
  if (o.vocab_size == 0) throw UsageError("--vocab-size must be >= 1");

  const auto lines = read_input_lines(o.corpus);
  std::vector<std::string> nonblank;
  for (const auto& l : lines) {
    if (!l.empty()) nonblank.push_back(l);
  }
  const auto opts = tok_opts(o.lowercase);
  auto vocab = std::make_shared<const Vocabulary>(build_vocab(nonblank, o.vocab_size, opts));
  const auto corpus = tokenize_corpus(nonblank, *vocab, opts);
  std::size_t tokens = 0;
  for (const auto& s : corpus) tokens += s.size();
  const auto model = NGramModel::train(corpus, vocab, o.order, dir, sm);

  std::ostringstream os;
  model.export_arpa(os);
  write_file_atomic(o.out, os.str());
  out << "trained " << (dir == Direction::kForward ? "forward" : "backward") << " order-" << o.order << ' '
      << o.smoothing << " model: vocab " << vocab->size() << " (" << vocab->content_size()
      << " words), sentences " << corpus.size() << ", tokens " << tokens << ", written to " << o.out
      << '\n';
  return kExitOk;
}

int cmd_generate(const GenerateOptions& o, const RunInfo& info, std::ostream& out) {
  std::vector<std::vector<std::string>> sets;
  if (!o.keywords.empty()) sets.push_back(split_list(o.keywords));
  if (!o.keywords_file.empty()) {
    for (const auto& line : read_input_lines(o.keywords_file)) sets.push_back(split_list(line));
  }
  if (sets.empty()) throw UsageError("give --keywords or --keywords-file");
  auto cfg = o.sampler.apply(keywords_config());
  cfg.selection = SelectionRule::min_nll_after(cfg.burn_in);
  const Models models = o.models.load(false);
  for (const auto& s : sets) {
    if (s.size() > cfg.max_len) throw DataError("more keywords than --max-len allows");
  }
  const auto results = parallel_map<TaskResult>(sets.size(), o.sampler.threads, [&](std::size_t i) {
    auto c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    return task_keywords(sets[i], c, models);
  });
  write_traces(o.sampler.trace_dir, results, models.vocab());
  emit(o.output, render_outputs(info, results, models.vocab()), out);
  return kExitOk;
}

int cmd_paraphrase(const ParaphraseOptions& o, const RunInfo& info, std::ostream& out) {
  const auto variant = [&] {
    try {
      return parse_variant(o.constraint);
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }();
  auto cfg = o.sampler.apply(paraphrase_config());
  cfg.selection = SelectionRule::first_below_bleu_ori(o.threshold);
  const bool needs_emb = variant != ParaphraseVariant::kNone && variant != ParaphraseVariant::kKw;
  const Models models = o.models.load(needs_emb);
  const auto inputs = tokenize_inputs(read_input_lines(o.input), models.vocab(), o.models.lowercase, cfg.max_len);
  const auto results = parallel_map<TaskResult>(inputs.size(), o.sampler.threads, [&](std::size_t i) {
    auto c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    return task_paraphrase(inputs[i], c, models, variant, o.rake_top_k);
  });
  write_traces(o.sampler.trace_dir, results, models.vocab());
  emit(o.output, render_outputs(info, results, models.vocab()), out);
  return kExitOk;
}

int cmd_correct(const CorrectOptions& o, const RunInfo& info, std::ostream& out) {
  auto cfg = o.sampler.apply(correction_config());
  if (o.sample_step > cfg.max_steps) throw UsageError("--sample-step must not exceed --steps");
  cfg.selection = SelectionRule::sample_at_step(o.sample_step);
  const Models models = o.models.load(true);
  const auto inputs = tokenize_inputs(read_input_lines(o.input), models.vocab(), o.models.lowercase, cfg.max_len);
  const auto results = parallel_map<TaskResult>(inputs.size(), o.sampler.threads, [&](std::size_t i) {
    auto c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    return task_correct(inputs[i], c, models);
  });
  write_traces(o.sampler.trace_dir, results, models.vocab());
  emit(o.output, render_outputs(info, results, models.vocab()), out);
  return kExitOk;
}

int cmd_diagnose(const DiagnoseOptions& o, const RunInfo& info, std::ostream& out) {
  std::ostringstream os;
  os << metadata_header(info);
  micro_audit(o, os);
  if (!o.corrupt.empty()) corruption_experiment(o, os);
  emit(o.output, os.str(), out);
  return kExitOk;
}

int cmd_eval(const EvalOptions& o, const RunInfo& info, std::ostream& out) {
  if (o.order < 1) throw UsageError("--order must be >= 1");
  const auto cand_lines = read_input_lines(o.candidates);
  std::vector<std::string> orig_lines, ref_lines;
  if (!o.originals.empty()) orig_lines = read_input_lines(o.originals);
  if (!o.references.empty()) ref_lines = read_input_lines(o.references);
  if (cand_lines.empty()) throw DataError("no candidate lines");
  auto check = [&](const std::vector<std::string>& v, const std::string& what) {
    if (!v.empty() && v.size() != cand_lines.size()) {
      throw DataError(what + " has " + std::to_string(v.size()) + " lines but candidates have " +
                      std::to_string(cand_lines.size()));
    }
  };
  if (!o.originals.empty()) check(orig_lines, "originals");
  if (!o.references.empty()) check(ref_lines, "references");

  const auto opts = tok_opts(o.lowercase);
  std::vector<std::string> all;
  all.insert(all.end(), cand_lines.begin(), cand_lines.end());
  all.insert(all.end(), orig_lines.begin(), orig_lines.end());
  std::vector<std::vector<std::string>> ref_cols(ref_lines.size());
  for (std::size_t i = 0; i < ref_lines.size(); ++i) {
    std::istringstream ls(ref_lines[i]);
    for (std::string c; std::getline(ls, c, '\t');) {
      if (c.find_first_not_of(' ') != std::string::npos) {
        ref_cols[i].push_back(c);
        all.push_back(c);
      }
    }
    if (ref_cols[i].empty()) throw DataError("references line " + std::to_string(i + 1) + " is empty");
  }
  for (std::size_t i = 0; i < cand_lines.size(); ++i) {
    if (cand_lines[i].empty()) throw DataError("candidate line " + std::to_string(i + 1) + " is empty");
    if (!orig_lines.empty() && orig_lines[i].empty()) {
      throw DataError("original line " + std::to_string(i + 1) + " is empty");
    }
  }
  const auto metric_vocab = build_vocab(all, std::numeric_limits<std::size_t>::max(), opts);

  std::unique_ptr<NGramModel> lm;
  if (!o.lm.empty()) {
    std::ifstream in(o.lm);
    if (!in) throw DataError("cannot open language model '" + o.lm + "'");
    lm = std::make_unique<NGramModel>(NGramModel::import_arpa(in));
  }

  const BleuConfig bc{o.order, 1e-9};
  const std::size_t n = cand_lines.size();
  std::vector<Sentence> cands, origs, lm_cands;
  std::vector<std::vector<Sentence>> refs;
  for (std::size_t i = 0; i < n; ++i) {
    cands.push_back(tokenize(cand_lines[i], metric_vocab, opts));
    if (!orig_lines.empty()) origs.push_back(tokenize(orig_lines[i], metric_vocab, opts));
    if (!ref_lines.empty()) {
      std::vector<Sentence> r;
      for (const auto& c : ref_cols[i]) r.push_back(tokenize(c, metric_vocab, opts));
      refs.push_back(std::move(r));
    }
    if (lm) lm_cands.push_back(tokenize(cand_lines[i], lm->vocab(), opts));
  }

  std::ostringstream os;
  os << metadata_header(info);
  os << "id\tbleu_ref\tbleu_ori\tnll\tgleu\n";
  double s_ref = 0, s_ori = 0, s_gleu = 0;
  for (std::size_t i = 0; i < n; ++i) {
    os << i + 1;
    if (!refs.empty()) {
      const double b = bleu_ref(cands[i], refs[i], bc);
      s_ref += b;
      os << '\t' << fmt(b);
    } else {
      os << "\t-";
    }
    if (!origs.empty()) {
      const double b = bleu_ori(cands[i], origs[i], bc);
      s_ori += b;
      os << '\t' << fmt(b);
    } else {
      os << "\t-";
    }
    os << '\t' << (lm ? fmt(lm->per_token_nll(lm_cands[i])) : "-");
    if (!refs.empty() && !origs.empty()) {
      const double g = gleu(cands[i], origs[i], refs[i], bc);
      s_gleu += g;
      os << '\t' << fmt(g);
    } else {
      os << "\t-";
    }
    os << '\n';
  }

  const double dn = static_cast<double>(n);
  os << "all";
  if (!refs.empty()) {
    os << '\t' << fmt(o.corpus_level ? corpus_bleu(cands, refs, bc) : s_ref / dn);
  } else {
    os << "\t-";
  }
  if (!origs.empty()) {
    if (o.corpus_level) {
      std::vector<std::vector<Sentence>> single;
      for (const auto& s : origs) single.push_back({s});
      os << '\t' << fmt(corpus_bleu(cands, single, bc));
    } else {
      os << '\t' << fmt(s_ori / dn);
    }
  } else {
    os << "\t-";
  }
  os << '\t' << (lm ? fmt(corpus_nll(*lm, lm_cands)) : "-");
  if (!refs.empty() && !origs.empty()) {
    os << '\t' << fmt(o.corpus_level ? corpus_gleu(cands, origs, refs, bc) : s_gleu / dn);
  } else {
    os << "\t-";
  }
  os << '\n';
  emit(o.output, os.str(), out);
  return kExitOk;
}

}  // namespace cgmh::cli
