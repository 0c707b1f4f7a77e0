#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cgmh {

using TokenId = std::uint32_t;

/// Dense token inventory. Ids 0..3 are always the special tokens
/// BOS, EOS, UNK and PHD (insertion placeholder), in that order.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr TokenId kPhd = 3;
  static constexpr TokenId kNumSpecials = 4;

  static constexpr std::string_view kBosText = "<s>";
  static constexpr std::string_view kEosText = "</s>";
  static constexpr std::string_view kUnkText = "<unk>";
  static constexpr std::string_view kPhdText = "<phd>";

  Vocabulary();

  /// Specials are prepended; duplicates and special surface forms are skipped.
  static Vocabulary from_words(std::span<const std::string> words);
  static Vocabulary from_words(std::initializer_list<std::string_view> words);

  /// One token per line, line number == id, specials first.
  static Vocabulary load(std::istream& in);
  void save(std::ostream& out) const;

  std::size_t size() const { return tokens_.size(); }
  std::size_t content_size() const { return tokens_.size() - kNumSpecials; }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view surface) const;
  /// Unknown surfaces map to kUnk.
  TokenId id_of(std::string_view surface) const;

  static constexpr bool is_special(TokenId id) { return id < kNumSpecials; }

  /// Ids of all non-special tokens, ascending.
  std::vector<TokenId> content_ids() const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string surface);

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> index_;
};

/// A chain state: content token ids only, sentence boundaries implicit.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<TokenId> ids) : ids_(std::move(ids)) {}
  Sentence(std::initializer_list<TokenId> ids) : ids_(ids) {}

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  TokenId operator[](std::size_t i) const { return ids_[i]; }
  std::span<const TokenId> ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  bool contains(TokenId id) const;

  Sentence with_replaced(std::size_t pos, TokenId id) const;
  Sentence with_inserted(std::size_t slot, TokenId id) const;
  Sentence with_erased(std::size_t pos) const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
  friend auto operator<=>(const Sentence&, const Sentence&) = default;

 private:
  std::vector<TokenId> ids_;
};

struct SentenceHash {
  std::size_t operator()(const Sentence& s) const noexcept;
};

struct TokenizeOptions {
  bool lowercase = false;
};

/// Counts whitespace tokens over all lines and keeps the `max_size` most
/// frequent ones. Ties go to the token seen first. Throws DataError on an
/// empty corpus.
Vocabulary build_vocab(std::istream& corpus, std::size_t max_size, const TokenizeOptions& opts = {});
Vocabulary build_vocab(std::span<const std::string> lines, std::size_t max_size,
                       const TokenizeOptions& opts = {});

/// Splits on whitespace; OOV surfaces become UNK. Throws DataError on blank text.
Sentence tokenize(std::string_view text, const Vocabulary& vocab, const TokenizeOptions& opts = {});

std::string detokenize(const Sentence& s, const Vocabulary& vocab);

/// Whitespace split with optional ASCII lowercasing.
std::vector<std::string> split_words(std::string_view text, const TokenizeOptions& opts = {});

/// Throws ContractError unless 1 <= size <= max_len and no BOS/EOS/PHD appear.
void check_sentence(const Sentence& s, std::size_t max_len);

/// Reads every non-blank line of `in`.
std::vector<std::string> read_lines(std::istream& in);

}  // namespace cgmh
