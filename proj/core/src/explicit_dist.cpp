#include "modeseek/explicit_dist.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {
// The mass total must be 1; the tolerance only absorbs distributions built
// from decimal inputs that cannot sum exactly.
constexpr double kMassTolerance = 1e-12;
}  // namespace

ExplicitDistribution::ExplicitDistribution(Vocab vocab, std::map<Sequence, Rational> entries)
    : vocab_(std::move(vocab)), entries_(std::move(entries)) {
  if (entries_.empty()) throw ZeroSupport("explicit distribution with empty support");
  Rational total = Rational::zero();
  for (const auto& [seq, p] : entries_) {
    validate_sequence(vocab_, seq);
    if (p.sign() <= 0)
      throw std::invalid_argument("explicit distribution: non-positive probability for \"" +
                                  render(vocab_, seq) + "\"");
    total += p;
    max_length_ = std::max(max_length_, seq.size());
  }
  if (std::fabs((total - Rational::one()).to_double()) > kMassTolerance)
    throw std::invalid_argument("explicit distribution: probabilities sum to " + total.str() +
                                ", expected 1");
}

ExplicitDistribution ExplicitDistribution::uniform(Vocab vocab,
                                                   const std::vector<Sequence>& support) {
  if (support.empty()) throw ZeroSupport("uniform distribution over empty support");
  std::map<Sequence, Rational> entries;
  Rational p(1, static_cast<long>(support.size()));
  for (const auto& seq : support) {
    auto [_, inserted] = entries.emplace(seq, p);
    if (!inserted) throw std::invalid_argument("uniform support contains duplicates");
  }
  return ExplicitDistribution(std::move(vocab), std::move(entries));
}

const Rational* ExplicitDistribution::mass_of(const Sequence& seq) const {
  auto it = entries_.find(seq);
  return it == entries_.end() ? nullptr : &it->second;
}

ExplicitDistribution ExplicitDistribution::load_tsv(std::istream& in) {
  std::vector<std::pair<Rational, std::vector<std::string>>> rows;
  std::vector<std::string> token_order;
  std::map<std::string, bool> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("distribution line " + std::to_string(line_no) + ": missing TAB");
    Rational p;
    try {
      p = Rational::parse(line.substr(0, tab));
    } catch (const std::invalid_argument& e) {
      throw ParseError("distribution line " + std::to_string(line_no) + ": " + e.what());
    }
    auto words = split_whitespace(line.substr(tab + 1));
    for (const auto& w : words) {
      if (w == kEosToken)
        throw ParseError("distribution line " + std::to_string(line_no) + ": literal \"</s>\"");
      if (!seen[w]) {
        seen[w] = true;
        token_order.push_back(w);
      }
    }
    rows.emplace_back(std::move(p), std::move(words));
  }
  if (rows.empty()) throw ParseError("distribution file has no entries");

  Vocab vocab = Vocab::from_tokens(token_order);
  std::map<Sequence, Rational> entries;
  for (auto& [p, words] : rows) {
    Sequence seq = sequence_from_words(vocab, words);
    auto [it, inserted] = entries.emplace(std::move(seq), p);
    if (!inserted) it->second += p;
  }
  return ExplicitDistribution(std::move(vocab), std::move(entries));
}

void ExplicitDistribution::save_tsv(std::ostream& out) const {
  for (const auto& [seq, p] : entries_) {
    out << p.str() << '\t' << render(vocab_, seq) << '\n';
  }
}

}  // namespace modeseek
