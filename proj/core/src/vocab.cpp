#include "cgmh/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "cgmh/error.hpp"

namespace cgmh {

Vocabulary::Vocabulary() {
  add(std::string(kBosText));
  add(std::string(kEosText));
  add(std::string(kUnkText));
  add(std::string(kPhdText));
}

void Vocabulary::add(std::string surface) {
  if (index_.contains(surface)) return;
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(surface, id);
  tokens_.push_back(std::move(surface));
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

Vocabulary Vocabulary::from_words(std::initializer_list<std::string_view> words) {
  Vocabulary v;
  for (auto w : words) v.add(std::string(w));
  return v;
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  const std::string_view expected[] = {kBosText, kEosText, kUnkText, kPhdText};
  if (lines.size() < kNumSpecials) throw FormatError("vocabulary file: missing special tokens");
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (lines[i] != expected[i]) {
      throw FormatError("vocabulary file: line " + std::to_string(i + 1) + " must be " +
                        std::string(expected[i]));
    }
  }
  Vocabulary v;
  for (std::size_t i = kNumSpecials; i < lines.size(); ++i) {
    if (lines[i].empty()) throw FormatError("vocabulary file: blank line " + std::to_string(i + 1));
    if (v.index_.contains(lines[i])) throw FormatError("vocabulary file: duplicate token " + lines[i]);
    v.add(lines[i]);
  }
  return v;
}

void Vocabulary::save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(surface);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id_of(std::string_view surface) const { return find(surface).value_or(kUnk); }

std::vector<TokenId> Vocabulary::content_ids() const {
  std::vector<TokenId> ids;
  ids.reserve(content_size());
  for (auto id = kNumSpecials; id < tokens_.size(); ++id) ids.push_back(id);
  return ids;
}

bool Sentence::contains(TokenId id) const {
  return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

Sentence Sentence::with_replaced(std::size_t pos, TokenId id) const {
  if (pos >= ids_.size()) throw ContractError("replace position out of range");
  auto ids = ids_;
  ids[pos] = id;
  return Sentence(std::move(ids));
}

Sentence Sentence::with_inserted(std::size_t slot, TokenId id) const {
  if (slot > ids_.size()) throw ContractError("insert slot out of range");
  auto ids = ids_;
  ids.insert(ids.begin() + static_cast<std::ptrdiff_t>(slot), id);
  return Sentence(std::move(ids));
}

Sentence Sentence::with_erased(std::size_t pos) const {
  if (pos >= ids_.size()) throw ContractError("delete position out of range");
  auto ids = ids_;
  ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(pos));
  return Sentence(std::move(ids));
}

std::size_t SentenceHash::operator()(const Sentence& s) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto id : s) {
    h ^= id + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

std::vector<std::string> split_words(std::string_view text, const TokenizeOptions& opts) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string w(text.substr(i, j - i));
      if (opts.lowercase) {
        for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      out.push_back(std::move(w));
    }
    i = j;
  }
  return out;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t\v\f") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

Vocabulary build_vocab(std::span<const std::string> lines, std::size_t max_size,
                       const TokenizeOptions& opts) {
  if (max_size == 0) throw ContractError("build_vocab: max_size must be >= 1");
  struct Count {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Count> counts;
  std::vector<std::string> order;
  for (const auto& line : lines) {
    for (auto& w : split_words(line, opts)) {
      if (w == Vocabulary::kBosText || w == Vocabulary::kEosText || w == Vocabulary::kUnkText ||
          w == Vocabulary::kPhdText) {
        continue;
      }
      auto [it, inserted] = counts.try_emplace(w, Count{0, order.size()});
      if (inserted) order.push_back(w);
      ++it->second.count;
    }
  }
  if (order.empty()) throw DataError("build_vocab: corpus contains no tokens");
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return counts[a].count > counts[b].count;
  });
  if (order.size() > max_size) order.resize(max_size);
  return Vocabulary::from_words(order);
}

Vocabulary build_vocab(std::istream& corpus, std::size_t max_size, const TokenizeOptions& opts) {
  const auto lines = read_lines(corpus);
  return build_vocab(lines, max_size, opts);
}

Sentence tokenize(std::string_view text, const Vocabulary& vocab, const TokenizeOptions& opts) {
  auto words = split_words(text, opts);
  if (words.empty()) throw DataError("tokenize: text contains no tokens");
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab.id_of(w));
  return Sentence(std::move(ids));
}

std::string detokenize(const Sentence& s, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out.push_back(' ');
    out += vocab.token(s[i]);
  }
  return out;
}

void check_sentence(const Sentence& s, std::size_t max_len) {
  if (s.empty()) throw ContractError("sentence is empty");
  if (s.size() > max_len) {
    throw ContractError("sentence length " + std::to_string(s.size()) + " exceeds max_len " +
                        std::to_string(max_len));
  }
  for (auto id : s) {
    if (id == Vocabulary::kBos || id == Vocabulary::kEos || id == Vocabulary::kPhd) {
      throw ContractError("sentence contains a boundary or placeholder token");
    }
  }
}

}  // namespace cgmh
