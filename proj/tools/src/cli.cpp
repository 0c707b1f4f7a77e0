#include "cgmh_cli/cli.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <functional>
#include <ostream>

#include "CLI11.hpp"
#include "cgmh/error.hpp"
#include "internal.hpp"

namespace cgmh::cli {

namespace {

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string opt = "--" + name;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == opt || a.starts_with(opt + "="); });
}

// CLI11 only reads config files attached to the top-level app, so the
// subcommand's --config file is merged here: every key not given as a flag
// is appended as one.
std::vector<std::string> merge_config_file(const std::vector<std::string>& args, CLI::App& app) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  std::vector<std::string> out = args;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub->get_name()}) continue;
    if (item.name == "config") throw UsageError("config files cannot include other config files");
    CLI::Option* op = sub->get_option_no_throw("--" + item.name);
    if (op == nullptr) throw UsageError("config file '" + path + "': unknown key '" + item.name + "'");
    if (flag_given(args, item.name)) continue;
    if (op->get_expected_min() == 0) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      std::int64_t on = 0;
      try {
        on = CLI::detail::to_flag_value(v);
      } catch (const std::exception&) {
        throw UsageError("config file '" + path + "': '" + item.name + "' expects true or false");
      }
      if (on > 0) out.push_back("--" + item.name);
      continue;
    }
    for (const auto& v : item.inputs) {
      out.push_back("--" + item.name);
      out.push_back(v);
    }
  }
  return out;
}

void add_sampler_flags(CLI::App* app, SamplerFlags& f, bool with_burn_in, bool with_floor) {
  app->add_option("--steps", f.steps, "MH steps per chain")->capture_default_str();
  if (with_burn_in) {
    app->add_option("--burn-in", f.burn_in, "first step considered for output selection")->capture_default_str();
  }
  app->add_option("--top-k", f.top_k, "pre-selector shortlist size")->capture_default_str();
  app->add_flag("--exact", f.exact, "use the whole vocabulary as candidate set");
  app->add_option("--seed", f.seed, "base random seed")->capture_default_str();
  app->add_option("--max-len", f.max_len, "maximum sentence length")->capture_default_str();
  app->add_option("--p-insert", f.p_insert, "insert probability")->capture_default_str();
  app->add_option("--p-delete", f.p_delete, "delete probability")->capture_default_str();
  app->add_option("--p-replace", f.p_replace, "replace probability")->capture_default_str();
  if (with_floor) {
    app->add_option("--floor", f.floor, "likelihood floor tau; negative disables")->capture_default_str();
  }
  app->add_option("--threads", f.threads, "worker threads for batch input")->capture_default_str();
  app->add_option("--trace-dir", f.trace_dir, "write one JSONL trace per input here");
}

void add_model_flags(CLI::App* app, ModelFlags& m, bool with_embeddings) {
  app->add_option("--fwd", m.forward, "forward ARPA model")->required();
  app->add_option("--bwd", m.backward, "backward ARPA model")->required();
  if (with_embeddings) app->add_option("--embeddings", m.embeddings, "GloVe-style text vectors");
  app->add_option("--stopwords", m.stopwords, "stopword list, one per line (default: shipped list)");
  app->add_flag("--lowercase", m.lowercase, "lowercase input text");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained sentence generation by Metropolis-Hastings sampling", "cgmh"};
  app.require_subcommand(1);
  std::string config_path;
  app.set_version_flag("--version", CGMH_VERSION);

  TrainOptions train;
  auto* sub_train = app.add_subcommand("train-lm", "train an n-gram model and write it as ARPA");
  sub_train->add_option("--corpus", train.corpus, "one tokenized sentence per line")->required();
  sub_train->add_option("--out", train.out, "output ARPA path")->required();
  sub_train->add_option("--order", train.order, "n-gram order")->capture_default_str();
  sub_train->add_option("--direction", train.direction, "fwd or bwd")->capture_default_str();
  sub_train->add_option("--vocab-size", train.vocab_size, "keep the most frequent words")->capture_default_str();
  sub_train->add_option("--smoothing", train.smoothing, "addk or kn")->capture_default_str();
  sub_train->add_option("--add-k", train.add_k, "add-k constant")->capture_default_str();
  sub_train->add_flag("--lowercase", train.lowercase, "lowercase the corpus");

  GenerateOptions gen;
  gen.sampler.steps = keywords_config().max_steps;
  gen.sampler.burn_in = keywords_config().burn_in;
  auto* sub_gen = app.add_subcommand("generate", "keywords-to-sentence generation");
  add_model_flags(sub_gen, gen.models, false);
  add_sampler_flags(sub_gen, gen.sampler, true, false);
  sub_gen->add_option("--keywords", gen.keywords, "comma separated keywords");
  sub_gen->add_option("--keywords-file", gen.keywords_file, "one keyword set per line");
  sub_gen->add_option("--output", gen.output, "output file (default stdout)");

  ParaphraseOptions para;
  para.sampler.steps = paraphrase_config().max_steps;
  auto* sub_para = app.add_subcommand("paraphrase", "unsupervised paraphrase generation");
  add_model_flags(sub_para, para.models, true);
  add_sampler_flags(sub_para, para.sampler, false, false);
  sub_para->add_option("--input", para.input, "one sentence per line")->required();
  sub_para->add_option("--output", para.output, "output file (default stdout)");
  sub_para->add_option("--constraint", para.constraint, "none, kw, kw+wva, kw+wvm, wva or wvm")
      ->capture_default_str();
  sub_para->add_option("--rake-top-k", para.rake_top_k, "RAKE phrases kept as keywords")->capture_default_str();
  sub_para->add_option("--threshold", para.threshold, "select the first state with BLEU-ori below this")
      ->capture_default_str();

  CorrectOptions corr;
  corr.sampler.steps = correction_config().max_steps;
  corr.sampler.floor = *correction_config().likelihood_floor;
  auto* sub_corr = app.add_subcommand("correct", "unsupervised error correction");
  add_model_flags(sub_corr, corr.models, true);
  add_sampler_flags(sub_corr, corr.sampler, false, true);
  sub_corr->add_option("--input", corr.input, "one sentence per line")->required();
  sub_corr->add_option("--output", corr.output, "output file (default stdout)");
  sub_corr->add_option("--sample-step", corr.sample_step, "output the state at this step")->capture_default_str();

  DiagnoseOptions diag;
  auto* sub_diag = app.add_subcommand("diagnose", "exact audit on a micro language, corrupted-start curves");
  sub_diag->add_option("--fixture", diag.fixture, "uniform3 or bigram3")->capture_default_str();
  sub_diag->add_option("--words", diag.words, "comma separated words for a uniform micro language");
  sub_diag->add_option("--max-len", diag.max_len, "maximum sentence length")->capture_default_str();
  sub_diag->add_option("--keywords", diag.keywords, "keyword constraint on the micro language");
  sub_diag->add_option("--steps", diag.steps, "length of the audit chain")->capture_default_str();
  sub_diag->add_option("--burn-in", diag.burn_in, "steps dropped before counting visits")->capture_default_str();
  sub_diag->add_option("--seed", diag.seed, "random seed")->capture_default_str();
  sub_diag->add_option("--checkpoints", diag.checkpoints, "comma separated steps for the TV curve");
  sub_diag->add_option("--p-insert", diag.p_insert, "insert probability")->capture_default_str();
  sub_diag->add_option("--p-delete", diag.p_delete, "delete probability")->capture_default_str();
  sub_diag->add_option("--p-replace", diag.p_replace, "replace probability")->capture_default_str();
  sub_diag->add_option("--output", diag.output, "output file (default stdout)");
  sub_diag->add_option("--corrupt", diag.corrupt, "corruption fractions, e.g. 0,0.05,0.1,1");
  sub_diag->add_option("--fwd", diag.models.forward, "forward ARPA model (with --corrupt)");
  sub_diag->add_option("--bwd", diag.models.backward, "backward ARPA model (with --corrupt)");
  sub_diag->add_option("--embeddings", diag.models.embeddings, "GloVe-style vectors (with --corrupt)");
  sub_diag->add_option("--stopwords", diag.models.stopwords, "stopword list");
  sub_diag->add_flag("--lowercase", diag.models.lowercase, "lowercase input text");
  sub_diag->add_option("--input", diag.input, "source<TAB>reference... per line (with --corrupt)");
  sub_diag->add_option("--constraint", diag.constraint, "paraphrase constraint for --corrupt")->capture_default_str();
  sub_diag->add_option("--corrupt-steps", diag.corrupt_steps, "chain length per corrupted start")
      ->capture_default_str();
  sub_diag->add_option("--corrupt-chains", diag.corrupt_chains, "chains per sentence and level")
      ->capture_default_str();
  sub_diag->add_option("--top-k", diag.top_k, "pre-selector shortlist size (with --corrupt)")->capture_default_str();
  sub_diag->add_option("--threads", diag.threads, "worker threads (with --corrupt)")->capture_default_str();

  EvalOptions ev;
  auto* sub_eval = app.add_subcommand("eval", "BLEU-ref, BLEU-ori, NLL and GLEU per line");
  sub_eval->add_option("--candidates", ev.candidates, "system outputs")->required();
  sub_eval->add_option("--originals", ev.originals, "source sentences");
  sub_eval->add_option("--references", ev.references, "tab separated references per line");
  sub_eval->add_option("--lm", ev.lm, "ARPA model for NLL");
  sub_eval->add_option("--output", ev.output, "output file (default stdout)");
  sub_eval->add_option("--order", ev.order, "maximum n-gram order")->capture_default_str();
  sub_eval->add_flag("--corpus-level", ev.corpus_level, "aggregate with corpus statistics");
  sub_eval->add_flag("--lowercase", ev.lowercase, "lowercase all text");

  for (auto* s : {sub_train, sub_gen, sub_para, sub_corr, sub_diag, sub_eval}) {
    s->add_option("--config", config_path, "key=value configuration file; flags take precedence")
        ->configurable(false);
  }

  std::vector<std::string> merged;
  try {
    merged = merge_config_file(args, app);
  } catch (const UsageError& e) {
    err << "cgmh: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "cgmh: " << e.what() << '\n';
    return kExitData;
  }
  std::vector<std::string> reversed(merged.rbegin(), merged.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << CGMH_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cgmh: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    for (auto* s : app.get_subcommands()) {
      RunInfo info;
      info.command = s->get_name();
      info.resolved_config = s->config_to_str(true, false);
      if (s == sub_train) return cmd_train_lm(train, info, out);
      if (s == sub_gen) {
        info.seed = gen.sampler.seed;
        info.steps = gen.sampler.steps;
        return cmd_generate(gen, info, out);
      }
      if (s == sub_para) {
        info.seed = para.sampler.seed;
        info.steps = para.sampler.steps;
        return cmd_paraphrase(para, info, out);
      }
      if (s == sub_corr) {
        info.seed = corr.sampler.seed;
        info.steps = corr.sampler.steps;
        return cmd_correct(corr, info, out);
      }
      if (s == sub_diag) {
        info.seed = diag.seed;
        info.steps = diag.steps;
        return cmd_diagnose(diag, info, out);
      }
      if (s == sub_eval) return cmd_eval(ev, info, out);
    }
    err << "cgmh: no command given\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "cgmh: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "cgmh: " << e.what() << '\n';
    return kExitData;
  } catch (const ContractError& e) {
    err << "cgmh: internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cgmh: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "cgmh: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace cgmh::cli
