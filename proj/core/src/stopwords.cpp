#include <istream>
#include <string_view>

#include "cgmh/constraints.hpp"

namespace cgmh {

namespace detail {
extern const std::string_view kEnglishStopwordsText;
}

StopwordSet load_stopwords(std::istream& in) {
  StopwordSet out;
  for (const auto& line : read_lines(in)) {
    for (auto& w : split_words(line)) out.insert(std::move(w));
  }
  return out;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    StopwordSet out;
    for (auto& w : split_words(detail::kEnglishStopwordsText)) out.insert(std::move(w));
    return out;
  }();
  return words;
}

}  // namespace cgmh
