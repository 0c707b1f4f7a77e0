#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cgmh/error.hpp"
#include "cgmh/ngram.hpp"

namespace cgmh {

namespace {

constexpr double kLn10 = std::numbers::ln10;
constexpr double kArpaZero = -99.0;
constexpr std::string_view kBackwardHeader = "#direction: backward";

std::string format_log10(double ln_value) {
  if (!std::isfinite(ln_value)) return "-99";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", ln_value / kLn10);
  return buf;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("ARPA line " + std::to_string(line_no) + ": bad number '" +
                      std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

void NGramModel::export_arpa(std::ostream& out) const {
  if (direction_ == Direction::kBackward) out << kBackwardHeader << '\n';
  out << "\\data\\\n";
  for (int n = 1; n <= order_; ++n) out << "ngram " << n << '=' << ngram_count(n) << '\n';

  const auto& toks = vocab_->tokens();
  out << "\n\\1-grams:\n";
  for (TokenId w = 0; w < toks.size(); ++w) {
    const bool present = w == Vocabulary::kBos || std::isfinite(unigram_logprob_[w]);
    if (!present) continue;
    out << format_log10(unigram_logprob_[w]) << '\t' << toks[w];
    if (order_ > 1 && unigram_backoff_[w] != 0.0) out << '\t' << format_log10(unigram_backoff_[w]);
    out << '\n';
  }

  for (int n = 2; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    // Sorted for byte-stable output.
    std::vector<std::pair<std::array<TokenId, kMaxOrder>, const Entry*>> rows;
    for (const auto& [k, e] : tables_[static_cast<std::size_t>(n - 2)]) {
      if (!e.phantom) rows.emplace_back(k.ids, &e);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [ids, e] : rows) {
      out << format_log10(e->log_prob);
      for (int i = 0; i < n; ++i) out << (i == 0 ? '\t' : ' ') << toks[ids[static_cast<std::size_t>(i)]];
      if (n < order_ && e->log_backoff != 0.0) out << '\t' << format_log10(e->log_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

class ArpaReader {
 public:
  static NGramModel read(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    Direction direction = Direction::kForward;
    bool saw_data = false;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line.starts_with(kBackwardHeader)) direction = Direction::kBackward;
      if (line == "\\data\\") {
        saw_data = true;
        break;
      }
    }
    if (!saw_data) throw FormatError("ARPA: missing \\data\\ header");

    std::vector<std::size_t> declared;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line.empty()) {
        if (declared.empty()) continue;
        break;
      }
      if (!line.starts_with("ngram ")) {
        throw FormatError("ARPA line " + std::to_string(line_no) + ": expected 'ngram N=count'");
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("ARPA line " + std::to_string(line_no) + ": bad count line");
      const auto n = static_cast<std::size_t>(parse_double(std::string_view(line).substr(6, eq - 6), line_no));
      const auto c = static_cast<std::size_t>(parse_double(std::string_view(line).substr(eq + 1), line_no));
      if (n != declared.size() + 1) throw FormatError("ARPA: n-gram orders must be listed in sequence");
      declared.push_back(c);
    }
    if (declared.empty()) throw FormatError("ARPA: no n-gram counts in \\data\\ section");
    if (declared.size() > static_cast<std::size_t>(NGramModel::kMaxOrder)) {
      throw FormatError("ARPA: order exceeds supported maximum");
    }
    const int order = static_cast<int>(declared.size());

    struct Row {
      double log_prob;
      double log_backoff;
      std::vector<std::string> words;
    };
    std::vector<std::vector<Row>> sections(declared.size());
    std::size_t current = 0;
    bool ended = false;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line.empty()) continue;
      if (line == "\\end\\") {
        ended = true;
        break;
      }
      if (line.front() == '\\') {
        const auto dash = line.find("-grams:");
        if (dash == std::string::npos) throw FormatError("ARPA line " + std::to_string(line_no) + ": unknown section " + line);
        current = static_cast<std::size_t>(parse_double(std::string_view(line).substr(1, dash - 1), line_no));
        if (current < 1 || current > declared.size()) {
          throw FormatError("ARPA line " + std::to_string(line_no) + ": section order out of range");
        }
        continue;
      }
      if (current == 0) throw FormatError("ARPA line " + std::to_string(line_no) + ": n-gram outside a section");
      const auto f = fields_of(line);
      if (f.size() != current + 1 && f.size() != current + 2) {
        throw FormatError("ARPA line " + std::to_string(line_no) + ": expected " +
                          std::to_string(current) + " words");
      }
      Row row{parse_double(f[0], line_no) * kLn10, 0.0, {}};
      for (std::size_t i = 1; i <= current; ++i) row.words.emplace_back(f[i]);
      if (f.size() == current + 2) row.log_backoff = parse_double(f.back(), line_no) * kLn10;
      sections[current - 1].push_back(std::move(row));
    }
    if (!ended) throw FormatError("ARPA: missing \\end\\ marker");
    for (std::size_t n = 0; n < declared.size(); ++n) {
      if (sections[n].size() != declared[n]) {
        throw FormatError("ARPA: " + std::to_string(n + 1) + "-gram count " +
                          std::to_string(sections[n].size()) + " does not match header " +
                          std::to_string(declared[n]));
      }
    }

    std::vector<std::string> words;
    for (const auto& row : sections[0]) words.push_back(row.words[0]);
    auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_words(words));
    NGramModel m(vocab, order, direction);

    auto lookup = [&](const std::string& w) {
      auto id = vocab->find(w);
      if (!id) throw FormatError("ARPA: word '" + w + "' missing from the unigram section");
      return *id;
    };
    for (const auto& row : sections[0]) {
      const TokenId id = lookup(row.words[0]);
      m.unigram_logprob_[id] = id == Vocabulary::kBos || row.log_prob <= kArpaZero * kLn10
                                   ? -std::numeric_limits<double>::infinity()
                                   : row.log_prob;
      m.unigram_backoff_[id] = row.log_backoff;
    }
    for (std::size_t n = 2; n <= declared.size(); ++n) {
      auto& table = m.tables_[n - 2];
      for (const auto& row : sections[n - 1]) {
        std::vector<TokenId> ids;
        for (const auto& w : row.words) ids.push_back(lookup(w));
        auto [it, inserted] = table.emplace(NGramModel::make_key(ids),
                                            NGramModel::Entry{row.log_prob, row.log_backoff, {}, {}, false});
        if (!inserted) throw FormatError("ARPA: duplicate " + std::to_string(n) + "-gram");
      }
    }
    m.finalize();
    return m;
  }

 private:
  static void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
};

NGramModel NGramModel::import_arpa(std::istream& in) { return ArpaReader::read(in); }

}  // namespace cgmh
