#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cgmh/embeddings.hpp"
#include "cgmh/error.hpp"
#include "test_util.hpp"

namespace cgmh {
namespace {

EmbeddingTable table_from(const std::string& text) {
  std::istringstream in(text);
  return EmbeddingTable::load(in);
}

double brute_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / std::sqrt(nu * nv);
}

const char* kAnimals =
    "dog 1 1 0\n"
    "cat 1 0.8 0.1\n"
    "car 0 0.3 1\n";

TEST(LoadEmbeddings, TwoLines) {
  const auto t = table_from("a 1 0\nb 0 1\n");
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.size(), 2u);
}

TEST(LoadEmbeddings, RaggedDimensionIsAnError) {
  EXPECT_THROW(table_from("a 1 0 0\nb 0 1\n"), FormatError);
}

TEST(LoadEmbeddings, NonNumericFieldIsAnError) {
  EXPECT_THROW(table_from("a 1 x\n"), FormatError);
}

TEST(LoadEmbeddings, ZeroVectorIsAnError) {
  EXPECT_THROW(table_from("a 0 0\n"), FormatError);
}

TEST(LoadEmbeddings, FirstDuplicateWins) {
  const auto t = table_from("a 1 0\na 0 1\n");
  EXPECT_EQ(t.size(), 1u);
  const auto v = t.lookup("a");
  ASSERT_TRUE(v);
  EXPECT_EQ((*v)[0], 1.0f);
}

TEST(LoadEmbeddings, ToyVectorFileSizeMatchesLineCount) {
  std::ifstream in(test::data_path("toy_vectors.txt"));
  const auto t = EmbeddingTable::load(in);
  EXPECT_EQ(t.size(), test::read_data_lines("toy_vectors.txt").size());
  EXPECT_EQ(t.dim(), 16u);
}

TEST(Cosine, ClosedForms) {
  const std::vector<double> x{1, 0}, y{0, 1}, d{1, 1}, v{0.3, -2.0};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
  EXPECT_EQ(cosine(x, y), 0.0);
  EXPECT_NEAR(cosine(x, d), std::sqrt(0.5), 1e-15);
}

TEST(Cosine, Symmetric) {
  const std::vector<double> u{0.1, 0.7, -0.2}, v{1.3, -0.4, 0.5};
  EXPECT_EQ(cosine(u, v), cosine(v, u));
}

TEST(Cosine, Errors) {
  const std::vector<double> z{0, 0}, x{1, 0}, x3{1, 0, 0};
  EXPECT_THROW(cosine(z, x), ContractError);
  EXPECT_THROW(cosine(x, x3), ContractError);
}

TEST(MaxSim, SelfMatchIsOne) {
  const auto t = table_from(kAnimals);
  const auto v = Vocabulary::from_words({"dog", "cat", "car"});
  EXPECT_NEAR(max_sim_to_reference("dog", tokenize("cat dog", v), v, t), 1.0, 1e-7);
}

TEST(MaxSim, BruteForceOverReference) {
  const auto t = table_from(kAnimals);
  const auto v = Vocabulary::from_words({"dog", "cat", "car"});
  const double expect = std::max(brute_cosine({1, 1, 0}, {1, 0.8, 0.1}), brute_cosine({1, 1, 0}, {0, 0.3, 1}));
  EXPECT_NEAR(max_sim_to_reference("dog", tokenize("cat car", v), v, t), expect, 1e-7);
}

TEST(MaxSim, OovPolicy) {
  auto t = table_from(kAnimals);
  const auto v = Vocabulary::from_words({"dog", "cat", "car", "zebra", "yak"});
  EXPECT_DOUBLE_EQ(max_sim_to_reference("zebra", tokenize("cat", v), v, t), kDefaultOovSimilarity);
  EXPECT_DOUBLE_EQ(max_sim_to_reference("dog", tokenize("zebra yak", v), v, t), kDefaultOovSimilarity);
  t.set_oov_similarity(0.5);
  EXPECT_DOUBLE_EQ(max_sim_to_reference("zebra", tokenize("cat", v), v, t), 0.5);
}

TEST(MaxSim, InvariantToOrderAndDuplicates) {
  const auto t = table_from(kAnimals);
  const auto v = Vocabulary::from_words({"dog", "cat", "car"});
  const double a = max_sim_to_reference("dog", tokenize("cat car", v), v, t);
  EXPECT_EQ(a, max_sim_to_reference("dog", tokenize("car cat", v), v, t));
  EXPECT_EQ(a, max_sim_to_reference("dog", tokenize("car cat car cat", v), v, t));
}

}  // namespace
}  // namespace cgmh
