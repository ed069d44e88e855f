#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace modeseek {

using TokenId = std::int32_t;

inline constexpr TokenId kEosId = 0;
inline constexpr const char* kEosToken = "</s>";

/// Integer-coded alphabet. Index 0 is always the end-of-sequence token "</s>".
class Vocab {
 public:
  Vocab() = default;

  /// Builds a vocab from non-EOS tokens; "</s>" is prepended at index 0.
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  /// Builds from a full token list whose first element must be "</s>".
  static Vocab from_full(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  TokenId id_of(std::string_view token) const;  // throws InvalidToken
  std::optional<TokenId> find(std::string_view token) const;
  bool contains_id(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }
  bool operator!=(const Vocab& o) const { return !(*this == o); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Token ids excluding EOS. Empty is the valid empty output.
using Sequence = std::vector<TokenId>;

/// Throws InvalidToken if any id is outside the vocab or equals EOS.
void validate_sequence(const Vocab& vocab, const Sequence& seq);

/// Space-joined token strings ("" for the empty sequence).
std::string render(const Vocab& vocab, const Sequence& seq);

/// Looks up whitespace-split tokens; throws InvalidToken on unknown words.
Sequence sequence_from_words(const Vocab& vocab, const std::vector<std::string>& words);

std::vector<std::string> split_whitespace(std::string_view line);
std::vector<std::string> split_characters(std::string_view line);

}  // namespace modeseek
