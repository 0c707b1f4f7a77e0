#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgmh/ngram.hpp"
#include "cgmh/sampler.hpp"
#include "cgmh/tasks.hpp"

namespace cgmh::cli {

/// Bad flags or flag combinations; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything recorded in an output header.
struct RunInfo {
  std::string command;
  std::string resolved_config;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
};

/// `#cgmh` lines: command, seed, steps, config hash and the resolved config.
std::string metadata_header(const RunInfo& info);

inline constexpr std::string_view kHeaderPrefix = "#cgmh";

/// Lines of a text file without header lines and trailing blank lines.
/// Throws DataError when the file is missing or an inner line is blank.
std::vector<std::string> read_input_lines(const std::string& path);

/// Writes via a temporary file and rename, so failures leave no partial output.
void write_file_atomic(const std::string& path, const std::string& content);

/// Writes to `path`, or to `out` when `path` is empty.
void emit(const std::string& path, const std::string& content, std::ostream& out);

std::vector<std::string> split_list(const std::string& s);

std::string fmt(double v, int precision = 4);

struct SamplerFlags {
  std::size_t steps = 200;
  std::size_t burn_in = 100;
  std::size_t top_k = 50;
  bool exact = false;
  std::uint64_t seed = 0;
  std::size_t max_len = 40;
  double p_insert = 1.0 / 3.0;
  double p_delete = 1.0 / 3.0;
  double p_replace = 1.0 / 3.0;
  double floor = -1.0;  ///< negative: no likelihood floor
  std::size_t threads = 1;
  std::string trace_dir;

  /// Copies the flags over `base`. Throws UsageError on invalid values.
  SamplerConfig apply(SamplerConfig base) const;
};

struct ModelFlags {
  std::string forward;
  std::string backward;
  std::string embeddings;
  std::string stopwords;
  bool lowercase = false;

  Models load(bool need_embeddings) const;
};

struct TrainOptions {
  std::string corpus;
  std::string out;
  std::string direction = "fwd";
  std::string smoothing = "addk";
  int order = 3;
  std::size_t vocab_size = 50000;
  double add_k = 0.1;
  bool lowercase = false;
};

struct GenerateOptions {
  ModelFlags models;
  SamplerFlags sampler;
  std::string keywords;
  std::string keywords_file;
  std::string output;
};

struct ParaphraseOptions {
  ModelFlags models;
  SamplerFlags sampler;
  std::string input;
  std::string output;
  std::string constraint = "kw+wvm";
  std::size_t rake_top_k = 2;
  double threshold = 55.0;
};

struct CorrectOptions {
  ModelFlags models;
  SamplerFlags sampler;
  std::string input;
  std::string output;
  std::size_t sample_step = 100;
};

struct DiagnoseOptions {
  std::string fixture = "uniform3";
  std::string words;
  std::size_t max_len = 3;
  std::string keywords;
  std::size_t steps = 200000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 0;
  std::string checkpoints;
  double p_insert = 1.0 / 3.0;
  double p_delete = 1.0 / 3.0;
  double p_replace = 1.0 / 3.0;
  std::string output;
  // Corrupted-start experiment.
  std::string corrupt;
  ModelFlags models;
  std::string input;
  std::string constraint = "wva";
  std::size_t corrupt_steps = 200;
  std::size_t corrupt_chains = 4;
  std::size_t top_k = 50;
  std::size_t threads = 1;
};

struct EvalOptions {
  std::string candidates;
  std::string originals;
  std::string references;
  std::string lm;
  std::string output;
  int order = 4;
  bool corpus_level = false;
  bool lowercase = false;
};

int cmd_train_lm(const TrainOptions& o, const RunInfo& info, std::ostream& out);
int cmd_generate(const GenerateOptions& o, const RunInfo& info, std::ostream& out);
int cmd_paraphrase(const ParaphraseOptions& o, const RunInfo& info, std::ostream& out);
int cmd_correct(const CorrectOptions& o, const RunInfo& info, std::ostream& out);
int cmd_diagnose(const DiagnoseOptions& o, const RunInfo& info, std::ostream& out);
int cmd_eval(const EvalOptions& o, const RunInfo& info, std::ostream& out);

}  // namespace cgmh::cli
