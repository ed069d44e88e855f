#pragma once

#include <cstdint>
#include <vector>

#include "modeseek/model.hpp"

namespace modeseek {

struct Enumerated {
  Sequence seq;
  double logprob;
};

/// Walks every positive-probability complete sequence of length <= max_len by
/// chain-rule descent, in lexicographic order. Throws EnumerationBound when
/// more than max_sequences completions exist. Shares no code with the search
/// modules; used as their ground truth.
std::vector<Enumerated> enumerate_support(const AutoregressiveModel& model, std::size_t max_len,
                                          std::size_t max_sequences = 10'000'000);

/// Descending probability, lexicographic ties — the oracle listing order.
void sort_by_probability(std::vector<Enumerated>& rows);

}  // namespace modeseek
