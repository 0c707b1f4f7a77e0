#include <algorithm>
#include <cctype>
#include <map>

#include "cgmh/constraints.hpp"
#include "cgmh/error.hpp"

namespace cgmh {

namespace {

bool is_punctuation(const std::string& w) {
  return std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::ispunct(c) != 0; });
}

}  // namespace

std::vector<TokenId> rake_extract(const Sentence& s, const Vocabulary& vocab,
                                  const StopwordSet& stopwords, std::size_t top_k) {
  if (s.empty()) throw ContractError("rake_extract: empty sentence");

  struct Phrase {
    std::vector<TokenId> words;
    std::size_t position;
  };
  std::vector<Phrase> phrases;
  std::vector<TokenId> run;
  std::size_t run_start = 0;
  auto flush = [&] {
    if (!run.empty()) phrases.push_back({run, run_start});
    run.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const TokenId id = s[i];
    const auto& w = vocab.token(id);
    if (Vocabulary::is_special(id) || stopwords.contains(w) || is_punctuation(w)) {
      flush();
      continue;
    }
    if (run.empty()) run_start = i;
    run.push_back(id);
  }
  flush();

  std::map<TokenId, double> freq, degree;
  for (const auto& p : phrases) {
    for (auto id : p.words) {
      freq[id] += 1.0;
      degree[id] += static_cast<double>(p.words.size());
    }
  }

  struct Scored {
    const Phrase* phrase;
    double score;
  };
  std::vector<Scored> unique;
  for (const auto& p : phrases) {
    const bool seen = std::any_of(unique.begin(), unique.end(),
                                  [&](const Scored& u) { return u.phrase->words == p.words; });
    if (seen) continue;
    double score = 0.0;
    for (auto id : p.words) score += degree[id] / freq[id];
    unique.push_back({&p, score});
  }
  std::stable_sort(unique.begin(), unique.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.phrase->position < b.phrase->position;
  });

  std::vector<TokenId> out;
  for (std::size_t i = 0; i < unique.size() && i < top_k; ++i) {
    for (auto id : unique[i].phrase->words) {
      if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
  }
  return out;
}

}  // namespace cgmh
