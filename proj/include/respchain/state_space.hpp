#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "respchain/error.hpp"

namespace respchain {

/// A response state as written in data: 1-based, 1..K.
using State = int;

/// Ordered response categories of an item. States are 1..K in data;
/// matrices index them 0..K-1.
class StateSpace {
public:
  explicit StateSpace(std::size_t size) : StateSpace(size, {}) {}

  /// Empty `labels` means the default "1".."K".
  StateSpace(std::size_t size, std::vector<std::string> labels)
      : size_(size), labels_(std::move(labels)) {
    if (size_ < 2)
      throw ValidationError("state space needs at least 2 states, got " +
                            std::to_string(size_));
    if (labels_.empty()) {
      for (std::size_t i = 1; i <= size_; ++i)
        labels_.push_back(std::to_string(i));
    }
    if (labels_.size() != size_)
      throw ValidationError("state space: " + std::to_string(labels_.size()) +
                            " labels for " + std::to_string(size_) +
                            " states");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size())
      throw ValidationError("state space: labels must be distinct");
  }

  std::size_t size() const noexcept { return size_; }
  const std::vector<std::string> &labels() const noexcept { return labels_; }

  bool contains(State s) const noexcept {
    return s >= 1 && static_cast<std::size_t>(s) <= size_;
  }

  friend bool operator==(const StateSpace &, const StateSpace &) = default;

private:
  std::size_t size_;
  std::vector<std::string> labels_;
};

struct ResponseSequence {
  std::string participant_id;
  std::optional<std::string> group;
  std::vector<State> states;

  std::size_t length() const noexcept { return states.size(); }
};

/// Throws ValidationError naming the first offending position (1-based).
inline void validate_states(const ResponseSequence &seq,
                            const StateSpace &space) {
  for (std::size_t i = 0; i < seq.states.size(); ++i) {
    if (!space.contains(seq.states[i]))
      throw ValidationError(
          "sequence '" + seq.participant_id + "': state " +
          std::to_string(seq.states[i]) + " at position " +
          std::to_string(i + 1) + " is outside 1.." +
          std::to_string(space.size()));
  }
}

/// Validation for transition-based operations: length >= 2 and in range.
inline void validate_for_transitions(const ResponseSequence &seq,
                                     const StateSpace &space) {
  if (seq.states.size() < 2)
    throw ValidationError("sequence '" + seq.participant_id +
                          "' has fewer than 2 responses (length " +
                          std::to_string(seq.states.size()) + ")");
  validate_states(seq, space);
}

/// Parses a compact digit string such as "3243232443244333".
inline std::vector<State> parse_digit_string(const std::string &digits) {
  std::vector<State> out;
  out.reserve(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const char c = digits[i];
    if (c < '0' || c > '9')
      throw ValidationError("non-digit '" + std::string(1, c) +
                            "' at position " + std::to_string(i + 1));
    out.push_back(c - '0');
  }
  return out;
}

inline ResponseSequence make_sequence(std::string id, const std::string &digits,
                                      std::optional<std::string> group = {}) {
  return {std::move(id), std::move(group), parse_digit_string(digits)};
}

} // namespace respchain
