#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "modeseek/rational.hpp"
#include "modeseek/vocab.hpp"

namespace modeseek {

/// Finite map from complete sequences to exact probability masses.
/// Probabilities are strictly positive and sum to 1.
class ExplicitDistribution {
 public:
  ExplicitDistribution(Vocab vocab, std::map<Sequence, Rational> entries);

  static ExplicitDistribution uniform(Vocab vocab, const std::vector<Sequence>& support);

  const Vocab& vocab() const { return vocab_; }
  const std::map<Sequence, Rational>& entries() const { return entries_; }
  std::size_t support_size() const { return entries_.size(); }
  std::size_t max_length() const { return max_length_; }

  const Rational* mass_of(const Sequence& seq) const;

  /// One "probability<TAB>token token ..." line per sequence; probabilities
  /// render as canonical rationals. Lines starting with '#' are comments.
  static ExplicitDistribution load_tsv(std::istream& in);
  void save_tsv(std::ostream& out) const;

 private:
  Vocab vocab_;
  std::map<Sequence, Rational> entries_;
  std::size_t max_length_ = 0;
};

}  // namespace modeseek
