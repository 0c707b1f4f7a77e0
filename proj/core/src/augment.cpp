#include "cgmh/augment.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace cgmh {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_consonant(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// consonant-vowel-consonant ending, last letter not w/x/y: stop -> stopping
bool doubles_final(std::string_view s) {
  if (s.size() < 3) return false;
  const char c = s.back();
  return is_consonant(c) && c != 'w' && c != 'x' && c != 'y' && is_vowel(s[s.size() - 2]) &&
         is_consonant(s[s.size() - 3]);
}

void add_roots(std::string_view w, std::set<std::string>& roots) {
  roots.emplace(w);
  auto strip = [&](std::string_view suffix) { return std::string(w.substr(0, w.size() - suffix.size())); };
  if (ends_with(w, "ing")) {
    const auto stem = strip("ing");
    roots.insert(stem);
    roots.insert(stem + "e");
    if (stem.size() >= 2 && stem.back() == stem[stem.size() - 2]) roots.insert(stem.substr(0, stem.size() - 1));
  }
  if (ends_with(w, "ied")) roots.insert(strip("ied") + "y");
  if (ends_with(w, "ed")) {
    const auto stem = strip("ed");
    roots.insert(stem);
    if (stem.size() >= 2 && stem.back() == stem[stem.size() - 2]) roots.insert(stem.substr(0, stem.size() - 1));
  }
  if (ends_with(w, "d")) roots.insert(strip("d"));
  if (ends_with(w, "ies")) roots.insert(strip("ies") + "y");
  if (ends_with(w, "es")) roots.insert(strip("es"));
  if (ends_with(w, "s")) roots.insert(strip("s"));
}

void add_forms(const std::string& root, std::set<std::string>& out) {
  if (root.empty()) return;
  out.insert(root);
  out.insert(root + "s");
  out.insert(root + "es");
  out.insert(root + "ed");
  out.insert(root + "d");
  out.insert(root + "ing");
  if (root.size() >= 2 && root.back() == 'e') out.insert(root.substr(0, root.size() - 1) + "ing");
  if (root.size() >= 2 && root.back() == 'y' && is_consonant(root[root.size() - 2])) {
    const auto stem = root.substr(0, root.size() - 1);
    out.insert(stem + "ies");
    out.insert(stem + "ied");
  }
  if (doubles_final(root)) {
    out.insert(root + root.back() + "ing");
    out.insert(root + root.back() + "ed");
  }
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t limit) {
  const std::size_t n = a.size(), m = b.size();
  if ((n > m ? n - m : m - n) > limit) return limit + 1;
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      std::size_t d = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) d = std::min(d, prev2[j - 2] + 1);
      cur[j] = d;
      row_min = std::min(row_min, d);
    }
    if (row_min > limit) return limit + 1;
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return std::min(prev[m], limit + 1);
}

std::vector<std::string> morphological_variants(std::string_view word) {
  std::set<std::string> roots, forms;
  add_roots(word, roots);
  for (const auto& r : roots) add_forms(r, forms);
  forms.erase(std::string(word));
  return {forms.begin(), forms.end()};
}

std::vector<TokenId> augment_candidates(std::string_view word, const Vocabulary& vocab) {
  std::vector<TokenId> out;
  if (word.empty()) return out;
  const auto& tokens = vocab.tokens();
  for (TokenId id = Vocabulary::kNumSpecials; id < tokens.size(); ++id) {
    const auto& t = tokens[id];
    if (t == word) continue;
    if (edit_distance(word, t, 2) <= 2) out.push_back(id);
  }
  for (const auto& v : morphological_variants(word)) {
    if (auto id = vocab.find(v); id && !Vocabulary::is_special(*id)) out.push_back(*id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CandidateAugmenter make_augmenter(std::shared_ptr<const Vocabulary> vocab) {
  auto cache = std::make_shared<std::unordered_map<TokenId, std::vector<TokenId>>>();
  return [vocab = std::move(vocab), cache](TokenId current) {
    auto it = cache->find(current);
    if (it != cache->end()) return it->second;
    std::vector<TokenId> words;
    if (!Vocabulary::is_special(current)) words = augment_candidates(vocab->token(current), *vocab);
    return cache->emplace(current, std::move(words)).first->second;
  };
}

}  // namespace cgmh
