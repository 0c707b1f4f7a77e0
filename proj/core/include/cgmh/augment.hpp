#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cgmh/proposals.hpp"
#include "cgmh/vocab.hpp"

namespace cgmh {

/// Damerau-Levenshtein distance (optimal string alignment variant). Returns
/// `limit + 1` as soon as the distance is known to exceed `limit`.
std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t limit);

/// Inflectional variants of `word` from a small English suffix table:
/// -s/-es/-ed/-d/-ing in both directions, with e-drop, y/i changes and
/// final consonant doubling. `word` itself is not included.
std::vector<std::string> morphological_variants(std::string_view word);

/// In-vocabulary words within edit distance 2 of `word` plus its
/// morphological variants, ascending by id. Never contains specials or
/// `word` itself.
std::vector<TokenId> augment_candidates(std::string_view word, const Vocabulary& vocab);

/// Augmenter over `vocab` that caches results per token. Not thread safe;
/// build one per chain.
CandidateAugmenter make_augmenter(std::shared_ptr<const Vocabulary> vocab);

}  // namespace cgmh
