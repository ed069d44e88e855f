#include "modeseek/vocab.hpp"

#include <sstream>

#include "modeseek/errors.hpp"

namespace modeseek {

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> full;
  full.reserve(tokens.size() + 1);
  full.emplace_back(kEosToken);
  for (const auto& t : tokens) full.push_back(t);
  return from_full(std::move(full));
}

Vocab Vocab::from_full(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kEosToken)
    throw InvalidToken("vocab must start with \"</s>\" at index 0");
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (v.tokens_[i].empty()) throw InvalidToken("empty token string");
    auto [_, inserted] = v.index_.emplace(v.tokens_[i], static_cast<TokenId>(i));
    if (!inserted) throw InvalidToken("duplicate token \"" + v.tokens_[i] + "\"");
  }
  return v;
}

const std::string& Vocab::token(TokenId id) const {
  if (!contains_id(id)) throw InvalidToken("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocab::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw InvalidToken("unknown token \"" + std::string(token) + "\"");
  return it->second;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void validate_sequence(const Vocab& vocab, const Sequence& seq) {
  for (TokenId id : seq) {
    if (!vocab.contains_id(id))
      throw InvalidToken("token id " + std::to_string(id) + " out of range");
    if (id == kEosId) throw InvalidToken("EOS inside a sequence");
  }
}

std::string render(const Vocab& vocab, const Sequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(seq[i]);
  }
  return out;
}

Sequence sequence_from_words(const Vocab& vocab, const std::vector<std::string>& words) {
  Sequence seq;
  seq.reserve(words.size());
  for (const auto& w : words) seq.push_back(vocab.id_of(w));
  return seq;
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

std::vector<std::string> split_characters(std::string_view line) {
  std::vector<std::string> out;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    out.emplace_back(1, c);
  }
  return out;
}

}  // namespace modeseek
