#pragma once

// Species words, multiset sectors and permutation bookkeeping.
//
// Labels are kept as the positive integers the caller supplies; only their
// relative order matters anywhere in the library.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace masep {

class SpeciesWord {
 public:
  SpeciesWord() = default;
  explicit SpeciesWord(std::vector<int> letters);

  /// Digit strings ("1213") when every label is a single digit, otherwise
  /// comma separated ("1,12,3").
  static SpeciesWord parse(std::string_view text);
  std::string str() const;

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  int operator[](std::size_t i) const { return letters_[i]; }
  std::span<const int> letters() const { return letters_; }

  int max_label() const;
  /// Sorted copy of the letters.
  std::vector<int> multiset() const;
  bool same_multiset(const SpeciesWord& other) const { return multiset() == other.multiset(); }

  /// Word with the letters at positions i and i+1 (0-based) exchanged.
  SpeciesWord swapped(std::size_t i) const;

  auto operator<=>(const SpeciesWord&) const = default;

 private:
  std::vector<int> letters_;
};

/// All distinct rearrangements of one multiset of labels, ranked in
/// lexicographic order.
class Sector {
 public:
  /// Sectors up to this size keep an explicit word table; larger ones rank by counting.
  static constexpr std::size_t kEagerLimit = 10080;

  explicit Sector(std::vector<int> multiset);

  const std::vector<int>& multiset() const { return multiset_; }
  std::size_t word_length() const { return multiset_.size(); }
  std::size_t dim() const { return dim_; }
  bool eager() const { return !words_.empty(); }

  bool contains(const SpeciesWord& word) const;
  std::size_t rank(const SpeciesWord& word) const;
  SpeciesWord unrank(std::size_t k) const;

  /// Multiset rendered as a word, e.g. "112".
  std::string label() const;

  bool operator==(const Sector& other) const { return multiset_ == other.multiset_; }

 private:
  std::uint64_t count_arrangements(const std::vector<std::size_t>& remaining) const;

  std::vector<int> multiset_;
  std::vector<int> distinct_;                 // sorted distinct labels
  std::vector<std::size_t> multiplicity_;     // parallel to distinct_
  std::size_t dim_ = 0;
  std::vector<SpeciesWord> words_;            // lexicographic, only when eager
};

/// Sector of `word`; `alphabet > 0` additionally bounds every label by it.
Sector sector_of(const SpeciesWord& word, int alphabet = 0);

/// Every multiset of `length` labels drawn from 1..alphabet, in lexicographic order.
std::vector<Sector> all_sectors(int length, int alphabet);

/// Binomial coefficient, exact in 64 bits for the sizes used here.
std::uint64_t binomial(int n, int k);

/// A bijection on {1..n}, stored in one-line notation.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images);

  static Permutation identity(int n);
  /// One-line notation, e.g. "321" (degrees up to 9) or "3,2,1".
  static Permutation parse(std::string_view text);

  int degree() const { return static_cast<int>(images_.size()); }
  /// sigma(i) for 1-based i.
  int operator()(int i) const { return images_[static_cast<std::size_t>(i - 1)]; }
  std::span<const int> images() const { return images_; }

  Permutation inverse() const;
  /// T_i sigma: exchange the entries at positions i and i+1 (1-based).
  Permutation transposed(int i) const;
  bool is_identity() const;
  std::string str() const;

  auto operator<=>(const Permutation&) const = default;

 private:
  std::vector<int> images_;
};

struct Inversion {
  int beta;   // larger value, appears first
  int alpha;
  auto operator<=>(const Inversion&) const = default;
};

/// All pairs (sigma(i), sigma(j)) with i < j and sigma(i) > sigma(j), sorted.
std::vector<Inversion> inversions(const Permutation& sigma);

std::vector<Permutation> all_permutations(int n);

/// sigma = T_{a_n} ... T_{a_1} together with the partial products and the
/// pair (sigma^(k-1)(a_k + 1), sigma^(k-1)(a_k)) consumed at every step.
struct TranspositionPath {
  std::vector<int> word;
  std::vector<Permutation> intermediates;  // sigma^(0) = Id ... sigma^(n)
  std::vector<Inversion> pairs;

  const Permutation& target() const { return intermediates.back(); }
  std::size_t length() const { return word.size(); }
};

enum class DecompositionStrategy {
  Bubble,          // left-to-right passes carrying the maximum right
  ReverseBubble,   // right-to-left passes carrying the minimum left
};

/// Minimal-length decomposition of sigma into adjacent transpositions.
TranspositionPath decompose(const Permutation& sigma,
                            DecompositionStrategy strategy = DecompositionStrategy::Bubble);

/// Path for an explicit word a_1..a_n applied to the identity of the given degree.
TranspositionPath path_from_word(const std::vector<int>& word, int degree);

}  // namespace masep
