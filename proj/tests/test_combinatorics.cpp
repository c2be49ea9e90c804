#include <doctest.h>

#include <algorithm>
#include <set>

#include "masep/combinatorics.hpp"
#include "masep/errors.hpp"
#include "reference.hpp"

using namespace masep;

TEST_CASE("species words parse and print") {
  CHECK(SpeciesWord::parse("1213").str() == "1213");
  CHECK(SpeciesWord::parse("1,12,3").max_label() == 12);
  CHECK(SpeciesWord::parse("1,12,3").str() == "1,12,3");
  CHECK(SpeciesWord::parse("312").swapped(0).str() == "132");
  CHECK(SpeciesWord::parse("121").same_multiset(SpeciesWord::parse("211")));
  CHECK_THROWS_AS(SpeciesWord::parse(""), InputError);
  CHECK_THROWS_AS(SpeciesWord::parse("1a"), InputError);
  CHECK_THROWS_AS(SpeciesWord::parse("102"), InputError);
}

TEST_CASE("sector 112 is ordered lexicographically") {
  const Sector s = sector_of(SpeciesWord::parse("121"));
  REQUIRE(s.dim() == 3);
  CHECK(s.unrank(0).str() == "112");
  CHECK(s.unrank(1).str() == "121");
  CHECK(s.unrank(2).str() == "211");
  CHECK(s.rank(SpeciesWord::parse("121")) == 1);
  CHECK(s.label() == "112");
  CHECK_FALSE(s.contains(SpeciesWord::parse("122")));
  CHECK_THROWS_AS(s.rank(SpeciesWord::parse("122")), InputError);
}

TEST_CASE("rank of 321 in the full sector") {
  CHECK(sector_of(SpeciesWord::parse("123")).rank(SpeciesWord::parse("321")) == 5);
}

TEST_CASE("alphabet bound is enforced") {
  CHECK_THROWS_AS(sector_of(SpeciesWord::parse("14"), 3), InputError);
  CHECK_NOTHROW(sector_of(SpeciesWord::parse("13"), 3));
}

TEST_CASE("rank and unrank agree with next_permutation on every small sector") {
  for (int n = 1; n <= 6; ++n) {
    for (const Sector& s : all_sectors(n, n)) {
      std::vector<int> w = s.multiset();
      std::size_t k = 0;
      do {
        const SpeciesWord word(w);
        CHECK(s.rank(word) == k);
        CHECK(s.unrank(k) == word);
        ++k;
      } while (std::next_permutation(w.begin(), w.end()));
      CHECK(k == s.dim());
    }
  }
}

TEST_CASE("lazy ranking matches the eager table") {
  // 8 letters with dim 40320 > kEagerLimit
  const Sector lazy(std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK_FALSE(lazy.eager());
  for (std::size_t k = 0; k < lazy.dim(); k += 997) {
    std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
    std::size_t r = k;
    std::vector<int> out;
    for (int i = 8; i >= 1; --i) {
      std::size_t f = 1;
      for (int j = 2; j < i; ++j) f *= static_cast<std::size_t>(j);
      const std::size_t idx = r / f;
      r %= f;
      out.push_back(v[idx]);
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    CHECK(lazy.unrank(k) == SpeciesWord(out));
    CHECK(lazy.rank(SpeciesWord(out)) == k);
  }
}

TEST_CASE("all_sectors counts multisets") {
  CHECK(all_sectors(3, 3).size() == 10);
  CHECK(all_sectors(2, 5).size() == 15);
  CHECK(binomial(10, 3) == 120);
}

TEST_CASE("inversions match brute force") {
  for (const Permutation& sigma : all_permutations(5)) {
    std::vector<Inversion> brute;
    for (int i = 1; i <= 5; ++i) {
      for (int j = i + 1; j <= 5; ++j) {
        if (sigma(i) > sigma(j)) brute.push_back({sigma(i), sigma(j)});
      }
    }
    std::sort(brute.begin(), brute.end());
    CHECK(inversions(sigma) == brute);
  }
}

TEST_CASE("decompositions are minimal and consume inversions") {
  for (int n = 1; n <= 5; ++n) {
    for (const Permutation& sigma : all_permutations(n)) {
      for (auto strategy : {DecompositionStrategy::Bubble, DecompositionStrategy::ReverseBubble}) {
        const TranspositionPath path = decompose(sigma, strategy);
        CHECK(path.target() == sigma);
        CHECK(path.length() == inversions(sigma).size());
        std::vector<Inversion> pairs = path.pairs;
        std::sort(pairs.begin(), pairs.end());
        CHECK(pairs == inversions(sigma));
        for (std::size_t k = 0; k < path.length(); ++k) {
          CHECK(path.intermediates[k + 1] == path.intermediates[k].transposed(path.word[k]));
        }
      }
    }
  }
}

TEST_CASE("explicit words from the reference enumeration reproduce sigma") {
  const Permutation sigma = Permutation::parse("3412");
  const auto words = ref::reduced_words({3, 4, 1, 2});
  CHECK(words.size() == 2);
  for (const auto& w : words) CHECK(path_from_word(w, 4).target() == sigma);
}

TEST_CASE("permutation basics") {
  const Permutation s = Permutation::parse("231");
  CHECK(s(1) == 2);
  CHECK(s.inverse().str() == "312");
  CHECK(s.transposed(1).str() == "321");
  CHECK(Permutation::identity(4).is_identity());
  CHECK_THROWS_AS(Permutation::parse("112"), InputError);
}
