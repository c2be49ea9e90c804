#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "masep/combinatorics.hpp"

namespace masep {

/// A configuration (X, pi): strictly increasing positions and the species
/// of the particle at each of them, left to right.
struct State {
  std::vector<int> positions;
  SpeciesWord species;

  State() = default;
  /// Validates strict increase and matching lengths.
  State(std::vector<int> positions, SpeciesWord species);

  std::size_t size() const { return positions.size(); }
  std::string str() const;  // "(0,1|12)"

  auto operator<=>(const State&) const = default;
};

/// Comma-separated integer list, e.g. "0,2,4" or "-3,1".
std::vector<int> parse_positions(std::string_view text);
std::string format_positions(const std::vector<int>& positions, char sep = ',');

}  // namespace masep
