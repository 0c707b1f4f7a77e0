#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgmh/embeddings.hpp"
#include "cgmh/error.hpp"
#include "cgmh_cli/cli.hpp"
#include "internal.hpp"

namespace cgmh::cli {

namespace {

std::ifstream open_input(const std::string& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + std::string(what) + " '" + path + "'");
  return in;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string metadata_header(const RunInfo& info) {
  std::ostringstream os;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(info.resolved_config)));
  os << kHeaderPrefix << " command=" << info.command << " version=" << CGMH_VERSION << '\n';
  os << kHeaderPrefix << " seed=" << info.seed << " steps=" << info.steps << '\n';
  os << kHeaderPrefix << " config_hash=" << hash << '\n';
  std::istringstream cfg(info.resolved_config);
  for (std::string line; std::getline(cfg, line);) {
    if (!line.empty()) os << kHeaderPrefix << " config " << line << '\n';
  }
  return os.str();
}

std::vector<std::string> read_input_lines(const std::string& path) {
  auto in = open_input(path, "input file");
  std::vector<std::string> lines;
  std::size_t lineno = 0, blank_at = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with(kHeaderPrefix)) continue;
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (!blank_at) blank_at = lineno;
      lines.emplace_back();
      continue;
    }
    if (blank_at) throw DataError(path + ":" + std::to_string(blank_at) + ": blank line");
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write '" + path + "'");
    os << content;
    os.flush();
    if (!os) {
      std::filesystem::remove(tmp);
      throw DataError("write to '" + path + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

SamplerConfig SamplerFlags::apply(SamplerConfig c) const {
  c.max_steps = steps;
  c.burn_in = std::min(burn_in, steps);
  c.top_k = top_k;
  c.exact = exact;
  c.seed = seed;
  c.max_len = max_len;
  c.ops = {p_insert, p_delete, p_replace};
  if (floor >= 0.0) {
    c.likelihood_floor = floor;
  } else {
    c.likelihood_floor.reset();
  }
  if (threads == 0) throw UsageError("--threads must be >= 1");
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return c;
}

Models ModelFlags::load(bool need_embeddings) const {
  if (forward.empty() || backward.empty()) throw UsageError("--fwd and --bwd language models are required");
  Models m;
  {
    auto in = open_input(forward, "forward model");
    m.forward = std::make_shared<NGramModel>(NGramModel::import_arpa(in));
  }
  {
    auto in = open_input(backward, "backward model");
    m.backward = std::make_shared<NGramModel>(NGramModel::import_arpa(in));
  }
  if (!embeddings.empty()) {
    auto in = open_input(embeddings, "embeddings");
    m.embeddings = std::make_shared<EmbeddingTable>(EmbeddingTable::load(in));
  } else if (need_embeddings) {
    throw UsageError("--embeddings is required for this constraint setting");
  }
  if (!stopwords.empty()) {
    auto in = open_input(stopwords, "stopword list");
    m.stopwords = load_stopwords(in);
  }
  m.validate();
  return m;
}

}  // namespace cgmh::cli
