#include <gtest/gtest.h>

#include <sstream>

#include "cgmh/error.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::istringstream in(text);
  return read_lines(in);
}

TEST(BuildVocab, KeepsMostFrequentAndBreaksTiesByFirstOccurrence) {
  const auto v = build_vocab(lines_of("a b\nb c\nb"), 2);
  ASSERT_EQ(v.size(), 6u);
  EXPECT_EQ(v.token(4), "b");
  EXPECT_EQ(v.token(5), "a");
  EXPECT_FALSE(v.find("c").has_value());
}

TEST(BuildVocab, NoTruncationWhenMaxSizeIsLarge) {
  const auto v = build_vocab(lines_of("a b\nb c\nb"), 100);
  EXPECT_EQ(v.content_size(), 3u);
  EXPECT_TRUE(v.find("c").has_value());
}

TEST(BuildVocab, SpecialsComeFirst) {
  const auto v = build_vocab(lines_of("x"), 10);
  EXPECT_EQ(v.token(Vocabulary::kBos), "<s>");
  EXPECT_EQ(v.token(Vocabulary::kEos), "</s>");
  EXPECT_EQ(v.token(Vocabulary::kUnk), "<unk>");
  EXPECT_EQ(v.token(Vocabulary::kPhd), "<phd>");
  for (TokenId i = 0; i < v.size(); ++i) EXPECT_EQ(v.find(v.token(i)), i);
}

TEST(BuildVocab, EmptyCorpusIsAnError) {
  EXPECT_THROW(build_vocab(lines_of("\n  \n"), 10), DataError);
  std::vector<std::string> none;
  EXPECT_THROW(build_vocab(none, 10), DataError);
}

TEST(BuildVocab, DeterministicBytes) {
  const std::string corpus = "the cat sat\non the mat\nthe end\nz y x w";
  std::ostringstream a, b;
  build_vocab(lines_of(corpus), 5).save(a);
  build_vocab(lines_of(corpus), 5).save(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  const auto v = Vocabulary::from_words({"alpha", "beta", "gamma"});
  std::stringstream ss;
  v.save(ss);
  EXPECT_EQ(Vocabulary::load(ss), v);
}

TEST(Vocabulary, LoadRejectsMissingSpecials) {
  std::istringstream in("a\nb\n");
  EXPECT_THROW(Vocabulary::load(in), FormatError);
}

TEST(Tokenize, KnownWords) {
  const auto v = Vocabulary::from_words({"a", "b"});
  EXPECT_EQ(tokenize("a b", v), (Sentence{4, 5}));
}

TEST(Tokenize, UnknownWordsBecomeUnk) {
  const auto v = Vocabulary::from_words({"a", "b"});
  EXPECT_EQ(tokenize("a z", v), (Sentence{4, Vocabulary::kUnk}));
}

TEST(Tokenize, Lowercasing) {
  const auto v = Vocabulary::from_words({"a", "b"});
  EXPECT_EQ(tokenize("A b", v, {.lowercase = true}), (Sentence{4, 5}));
  EXPECT_EQ(tokenize("A b", v), (Sentence{Vocabulary::kUnk, 5}));
}

TEST(Tokenize, BlankTextIsAnError) {
  const auto v = Vocabulary::from_words({"a"});
  EXPECT_THROW(tokenize("", v), DataError);
  EXPECT_THROW(tokenize(" \t ", v), DataError);
}

TEST(Detokenize, JoinsWithSpaces) {
  const auto v = Vocabulary::from_words({"a", "b"});
  EXPECT_EQ(detokenize(Sentence{4, 5}, v), "a b");
  EXPECT_EQ(detokenize(Sentence{5}, v), "b");
}

TEST(Detokenize, RoundTripsNormalizedText) {
  const std::string text = "the decision is to build a new home .";
  const auto v = build_vocab(lines_of(text), 100);
  EXPECT_EQ(detokenize(tokenize(text, v), v), text);
}

TEST(Sentence, EditOperations) {
  const Sentence abc{4, 5, 6};
  EXPECT_EQ(abc.with_erased(1), (Sentence{4, 6}));
  EXPECT_EQ((Sentence{4, 5}).with_inserted(0, 7), (Sentence{7, 4, 5}));
  EXPECT_EQ((Sentence{4, 5}).with_replaced(0, 6), (Sentence{6, 5}));
  EXPECT_EQ((Sentence{4, 5}).with_inserted(2, 7), (Sentence{4, 5, 7}));
  EXPECT_THROW(abc.with_erased(3), ContractError);
  EXPECT_THROW(abc.with_inserted(4, 4), ContractError);
}

TEST(CheckSentence, EnforcesLengthAndTokens) {
  EXPECT_NO_THROW(check_sentence(Sentence{4, 5}, 2));
  EXPECT_THROW(check_sentence(Sentence{}, 2), ContractError);
  EXPECT_THROW(check_sentence(Sentence{4, 5, 6}, 2), ContractError);
  EXPECT_THROW(check_sentence(Sentence{4, Vocabulary::kEos}, 5), ContractError);
  EXPECT_THROW(check_sentence(Sentence{Vocabulary::kPhd}, 5), ContractError);
  EXPECT_NO_THROW(check_sentence(Sentence{Vocabulary::kUnk}, 5));
}

}  // namespace
}  // namespace cgmh
