#include "masep/state.hpp"

#include <charconv>

#include "masep/errors.hpp"

namespace masep {

State::State(std::vector<int> pos, SpeciesWord word) : positions(std::move(pos)), species(std::move(word)) {
  if (positions.empty()) throw InputError("a state needs at least one particle");
  if (positions.size() != species.size()) {
    throw InputError("position count " + std::to_string(positions.size()) + " does not match species word length " +
                     std::to_string(species.size()));
  }
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] <= positions[i - 1]) throw InputError("positions must be strictly increasing");
  }
}

std::string State::str() const { return "(" + format_positions(positions) + "|" + species.str() + ")"; }

std::vector<int> parse_positions(std::string_view text) {
  std::vector<int> out;
  if (text.empty()) throw InputError("empty position list");
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw InputError("bad position list '" + std::string(text) + "'");
    }
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

std::string format_positions(const std::vector<int>& positions, char sep) {
  std::string out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(positions[i]);
  }
  return out;
}

}  // namespace masep
