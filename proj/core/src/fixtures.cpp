#include "cgmh/fixtures.hpp"

#include <string>

#include "cgmh/error.hpp"

namespace cgmh::fixtures {

namespace {

MicroFixture uniform_fixture(std::shared_ptr<const Vocabulary> vocab) {
  MicroFixture f;
  f.vocab = vocab;
  f.forward = std::make_shared<NGramModel>(NGramModel::uniform(vocab, 2, Direction::kForward));
  f.backward = std::make_shared<NGramModel>(NGramModel::uniform(vocab, 2, Direction::kBackward));
  return f;
}

}  // namespace

MicroFixture uniform3() {
  return uniform_fixture(std::make_shared<const Vocabulary>(Vocabulary::from_words({"a", "b", "c"})));
}

MicroFixture uniform_over(std::span<const std::string> words) {
  if (words.empty()) throw DataError("fixture needs at least one word");
  return uniform_fixture(std::make_shared<const Vocabulary>(Vocabulary::from_words(words)));
}

std::span<const std::string> toy_bigram_corpus() {
  static const std::vector<std::string> lines = {
      "a b",     "a b c", "b c",   "c a b", "b",     "c c a b", "a b b", "b c a",
      "a b c c", "c b",   "a b a", "c",     "b c c", "a b",     "c a",   "b b c",
  };
  return lines;
}

MicroFixture bigram3() {
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_words({"a", "b", "c"}));
  const auto corpus = tokenize_corpus(toy_bigram_corpus(), *vocab);
  MicroFixture f;
  f.vocab = vocab;
  f.forward = std::make_shared<NGramModel>(NGramModel::train(corpus, vocab, 2, Direction::kForward));
  f.backward = std::make_shared<NGramModel>(NGramModel::train(corpus, vocab, 2, Direction::kBackward));
  return f;
}

MicroFixture by_name(std::string_view name) {
  if (name == "uniform3") return uniform3();
  if (name == "bigram3") return bigram3();
  throw DataError("unknown fixture '" + std::string(name) + "' (expected uniform3 or bigram3)");
}

}  // namespace cgmh::fixtures
