#include "masep/combinatorics.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include "masep/errors.hpp"

namespace masep {

namespace {

std::vector<int> parse_int_list(std::string_view text, std::string_view what) {
  std::vector<int> out;
  if (text.empty()) throw InputError(std::string(what) + ": empty");
  const bool digits_only = text.find(',') == std::string_view::npos;
  if (digits_only) {
    for (char c : text) {
      if (c < '0' || c > '9') throw InputError(std::string(what) + ": bad character in '" + std::string(text) + "'");
      out.push_back(c - '0');
    }
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, end - start);
    int value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw InputError(std::string(what) + ": bad entry in '" + std::string(text) + "'");
    }
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

std::string join_labels(std::span<const int> labels) {
  const bool short_form = std::all_of(labels.begin(), labels.end(), [](int v) { return v >= 0 && v <= 9; });
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!short_form && i > 0) out += ',';
    out += std::to_string(labels[i]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpeciesWord

SpeciesWord::SpeciesWord(std::vector<int> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw InputError("species word must be nonempty");
  for (int v : letters_) {
    if (v < 1) throw InputError("species labels must be positive, got " + std::to_string(v));
  }
}

SpeciesWord SpeciesWord::parse(std::string_view text) {
  return SpeciesWord(parse_int_list(text, "species word"));
}

std::string SpeciesWord::str() const { return join_labels(letters_); }

int SpeciesWord::max_label() const {
  return letters_.empty() ? 0 : *std::max_element(letters_.begin(), letters_.end());
}

std::vector<int> SpeciesWord::multiset() const {
  std::vector<int> m = letters_;
  std::sort(m.begin(), m.end());
  return m;
}

SpeciesWord SpeciesWord::swapped(std::size_t i) const {
  SpeciesWord w = *this;
  std::swap(w.letters_[i], w.letters_[i + 1]);
  return w;
}

// ---------------------------------------------------------------------------
// Sector

Sector::Sector(std::vector<int> multiset) : multiset_(std::move(multiset)) {
  if (multiset_.empty()) throw InputError("sector multiset must be nonempty");
  std::sort(multiset_.begin(), multiset_.end());
  if (multiset_.front() < 1) throw InputError("species labels must be positive");
  for (int v : multiset_) {
    if (distinct_.empty() || distinct_.back() != v) {
      distinct_.push_back(v);
      multiplicity_.push_back(1);
    } else {
      ++multiplicity_.back();
    }
  }
  dim_ = static_cast<std::size_t>(count_arrangements(multiplicity_));
  if (dim_ <= kEagerLimit) {
    words_.reserve(dim_);
    std::vector<int> w = multiset_;
    do {
      words_.emplace_back(w);
    } while (std::next_permutation(w.begin(), w.end()));
  }
}

std::uint64_t Sector::count_arrangements(const std::vector<std::size_t>& remaining) const {
  // multinomial(total; remaining...) built up factor by factor to stay exact
  std::uint64_t result = 1;
  std::uint64_t placed = 0;
  for (std::size_t m : remaining) {
    for (std::size_t j = 1; j <= m; ++j) {
      ++placed;
      result = result * placed / j;
    }
  }
  return result;
}

bool Sector::contains(const SpeciesWord& word) const {
  return word.size() == multiset_.size() && word.multiset() == multiset_;
}

std::size_t Sector::rank(const SpeciesWord& word) const {
  if (!contains(word)) {
    throw InputError("word " + word.str() + " is not a rearrangement of " + label());
  }
  if (eager()) {
    auto it = std::lower_bound(words_.begin(), words_.end(), word);
    return static_cast<std::size_t>(it - words_.begin());
  }
  std::vector<std::size_t> remaining = multiplicity_;
  std::size_t r = 0;
  for (std::size_t pos = 0; pos < word.size(); ++pos) {
    const auto at = static_cast<std::size_t>(
        std::lower_bound(distinct_.begin(), distinct_.end(), word[pos]) - distinct_.begin());
    for (std::size_t c = 0; c < at; ++c) {
      if (remaining[c] == 0) continue;
      --remaining[c];
      r += static_cast<std::size_t>(count_arrangements(remaining));
      ++remaining[c];
    }
    --remaining[at];
  }
  return r;
}

SpeciesWord Sector::unrank(std::size_t k) const {
  if (k >= dim_) throw InputError("rank " + std::to_string(k) + " outside sector " + label());
  if (eager()) return words_[k];
  std::vector<std::size_t> remaining = multiplicity_;
  std::vector<int> letters;
  letters.reserve(multiset_.size());
  for (std::size_t pos = 0; pos < multiset_.size(); ++pos) {
    for (std::size_t c = 0; c < distinct_.size(); ++c) {
      if (remaining[c] == 0) continue;
      --remaining[c];
      const auto block = static_cast<std::size_t>(count_arrangements(remaining));
      if (k < block) {
        letters.push_back(distinct_[c]);
        break;
      }
      k -= block;
      ++remaining[c];
    }
  }
  return SpeciesWord(std::move(letters));
}

std::string Sector::label() const { return join_labels(multiset_); }

Sector sector_of(const SpeciesWord& word, int alphabet) {
  if (word.empty()) throw InputError("species word must be nonempty");
  if (alphabet > 0 && word.max_label() > alphabet) {
    throw InputError("label " + std::to_string(word.max_label()) + " exceeds alphabet size " +
                     std::to_string(alphabet));
  }
  return Sector(word.multiset());
}

std::vector<Sector> all_sectors(int length, int alphabet) {
  if (length < 1 || alphabet < 1) throw InputError("all_sectors: length and alphabet must be positive");
  std::vector<Sector> out;
  std::vector<int> m(static_cast<std::size_t>(length), 1);
  while (true) {
    out.emplace_back(m);
    // next nondecreasing sequence over 1..alphabet
    int i = length - 1;
    while (i >= 0 && m[static_cast<std::size_t>(i)] == alphabet) --i;
    if (i < 0) break;
    const int v = m[static_cast<std::size_t>(i)] + 1;
    for (int j = i; j < length; ++j) m[static_cast<std::size_t>(j)] = v;
  }
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int j = 1; j <= k; ++j) r = r * static_cast<std::uint64_t>(n - k + j) / static_cast<std::uint64_t>(j);
  return r;
}

// ---------------------------------------------------------------------------
// Permutation

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  std::vector<bool> seen(images_.size() + 1, false);
  for (int v : images_) {
    if (v < 1 || v > static_cast<int>(images_.size()) || seen[static_cast<std::size_t>(v)]) {
      throw InputError("not a permutation of 1.." + std::to_string(images_.size()));
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> id(static_cast<std::size_t>(n));
  std::iota(id.begin(), id.end(), 1);
  return Permutation(std::move(id));
}

Permutation Permutation::parse(std::string_view text) {
  return Permutation(parse_int_list(text, "permutation"));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    inv[static_cast<std::size_t>(images_[i] - 1)] = static_cast<int>(i + 1);
  }
  return Permutation(std::move(inv));
}

Permutation Permutation::transposed(int i) const {
  if (i < 1 || i >= degree()) throw InputError("transposition position out of range");
  Permutation out = *this;
  std::swap(out.images_[static_cast<std::size_t>(i - 1)], out.images_[static_cast<std::size_t>(i)]);
  return out;
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i] != static_cast<int>(i + 1)) return false;
  }
  return true;
}

std::string Permutation::str() const { return join_labels(images_); }

std::vector<Inversion> inversions(const Permutation& sigma) {
  std::vector<Inversion> out;
  const auto im = sigma.images();
  for (std::size_t i = 0; i < im.size(); ++i) {
    for (std::size_t j = i + 1; j < im.size(); ++j) {
      if (im[i] > im[j]) out.push_back({im[i], im[j]});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Permutation> all_permutations(int n) {
  std::vector<Permutation> out;
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  do {
    out.emplace_back(v);
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

TranspositionPath path_from_word(const std::vector<int>& word, int degree) {
  TranspositionPath path;
  path.word = word;
  path.intermediates.push_back(Permutation::identity(degree));
  for (int a : word) {
    const Permutation& prev = path.intermediates.back();
    path.pairs.push_back({prev(a + 1), prev(a)});
    path.intermediates.push_back(prev.transposed(a));
  }
  return path;
}

TranspositionPath decompose(const Permutation& sigma, DecompositionStrategy strategy) {
  // Sort sigma back to the identity; every swap removes exactly one
  // inversion, so the reversed swap sequence is a reduced word for sigma.
  std::vector<int> v(sigma.images().begin(), sigma.images().end());
  std::vector<int> swaps;
  const int n = sigma.degree();
  bool changed = true;
  while (changed) {
    changed = false;
    if (strategy == DecompositionStrategy::Bubble) {
      for (int i = 0; i + 1 < n; ++i) {
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i + 1)]) {
          std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i + 1)]);
          swaps.push_back(i + 1);
          changed = true;
        }
      }
    } else {
      for (int i = n - 2; i >= 0; --i) {
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i + 1)]) {
          std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i + 1)]);
          swaps.push_back(i + 1);
          changed = true;
        }
      }
    }
  }
  std::reverse(swaps.begin(), swaps.end());
  return path_from_word(swaps, n);
}

}  // namespace masep
