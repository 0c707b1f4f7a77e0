#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgmh/ngram.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh::fixtures {

/// A forward/backward model pair over a small vocabulary.
struct MicroFixture {
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const NGramModel> forward;
  std::shared_ptr<const NGramModel> backward;
};

/// Vocabulary {a, b, c}; order-2 models predicting a, b, c and EOS with 1/4 each.
MicroFixture uniform3();

/// Uniform order-2 models over an arbitrary word list.
MicroFixture uniform_over(std::span<const std::string> words);

/// Lines of the bigram toy corpus over {a, b, c}.
std::span<const std::string> toy_bigram_corpus();

/// Order-2 add-k models trained on toy_bigram_corpus().
MicroFixture bigram3();

/// Looks up a fixture by name ("uniform3", "bigram3"). Throws DataError otherwise.
MicroFixture by_name(std::string_view name);

}  // namespace cgmh::fixtures
