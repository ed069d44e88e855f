#include "modeseek/model_io.hpp"

#include <fstream>
#include <sstream>

#include "modeseek/errors.hpp"
#include "modeseek/ngram.hpp"
#include "modeseek/synthetic.hpp"
#include "modeseek/trie_model.hpp"

namespace modeseek {

namespace {

using json = nlohmann::ordered_json;

json vocab_to_json(const Vocab& vocab) { return json(vocab.tokens()); }

Vocab vocab_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("model vocab must be an array");
  return Vocab::from_full(j.get<std::vector<std::string>>());
}

json explicit_params(const TrieModel& model) {
  json entries = json::array();
  for (const auto& [seq, p] : model.distribution().entries())
    entries.push_back(json::array({p.str(), render(model.vocab(), seq)}));
  return json{{"entries", std::move(entries)}};
}

std::shared_ptr<const AutoregressiveModel> explicit_from_json(const Vocab& vocab, const json& params) {
  std::map<Sequence, Rational> entries;
  for (const auto& row : params.at("entries")) {
    Rational p = Rational::parse(row.at(0).get<std::string>());
    Sequence seq = sequence_from_words(vocab, split_whitespace(row.at(1).get<std::string>()));
    auto [it, inserted] = entries.emplace(std::move(seq), p);
    if (!inserted) it->second += p;
  }
  return to_autoregressive(ExplicitDistribution(vocab, std::move(entries)));
}

json ngram_params(const NgramModel& model) {
  json counts = json::array();
  for (const auto& [ctx, by_token] : model.counts()) {
    json tokens = json::array();
    for (const auto& [token, c] : by_token) tokens.push_back(json::array({token, c}));
    counts.push_back(json::array({json(ctx), std::move(tokens)}));
  }
  return json{{"order", model.order()},
              {"alpha", model.alpha()},
              {"max_len", model.max_len()},
              {"counts", std::move(counts)}};
}

std::shared_ptr<const AutoregressiveModel> ngram_from_json(Vocab vocab, const json& params) {
  std::map<NgramModel::Context, NgramModel::ContextCounts> counts;
  for (const auto& row : params.at("counts")) {
    NgramModel::Context ctx = row.at(0).get<NgramModel::Context>();
    NgramModel::ContextCounts by_token;
    for (const auto& tc : row.at(1))
      by_token[tc.at(0).get<TokenId>()] = tc.at(1).get<std::uint64_t>();
    counts.emplace(std::move(ctx), std::move(by_token));
  }
  return std::make_shared<NgramModel>(std::move(vocab), params.at("order").get<int>(),
                                      params.at("alpha").get<double>(),
                                      params.at("max_len").get<std::size_t>(), std::move(counts));
}

json family_params(const LengthFamilyModel& model) {
  return json{{"q", model.empty_mass().str()},
              {"branching", model.branching()},
              {"length", model.length()}};
}

std::shared_ptr<const AutoregressiveModel> family_from_json(const json& params) {
  return std::make_shared<LengthFamilyModel>(Rational::parse(params.at("q").get<std::string>()),
                                             params.at("branching").get<int>(),
                                             params.at("length").get<std::size_t>());
}

}  // namespace

json model_to_json(const AutoregressiveModel& model) {
  json params;
  if (const auto* trie = dynamic_cast<const TrieModel*>(&model)) {
    params = explicit_params(*trie);
  } else if (const auto* ngram = dynamic_cast<const NgramModel*>(&model)) {
    params = ngram_params(*ngram);
  } else if (const auto* family = dynamic_cast<const LengthFamilyModel*>(&model)) {
    params = family_params(*family);
  } else {
    throw ParseError("model kind \"" + model.kind() + "\" has no serialized form");
  }
  return json{{"kind", model.kind()}, {"vocab", vocab_to_json(model.vocab())},
              {"params", std::move(params)}};
}

std::string model_to_string(const AutoregressiveModel& model) {
  return model_to_json(model).dump() + "\n";
}

std::shared_ptr<const AutoregressiveModel> model_from_json(const json& j) {
  try {
    std::string kind = j.at("kind").get<std::string>();
    Vocab vocab = vocab_from_json(j.at("vocab"));
    const json& params = j.at("params");
    if (kind == "explicit") return explicit_from_json(vocab, params);
    if (kind == "ngram") return ngram_from_json(std::move(vocab), params);
    if (kind == "length_family") return family_from_json(params);
    throw ParseError("unknown model kind \"" + kind + "\"");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
}

std::shared_ptr<const AutoregressiveModel> load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError("empty model file " + path.string());
  if (text[first] == '{') {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ParseError("invalid JSON in " + path.string());
    return model_from_json(j);
  }
  std::istringstream tsv(text);
  try {
    return to_autoregressive(ExplicitDistribution::load_tsv(tsv));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_model_file(const AutoregressiveModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file " + path.string());
  out << model_to_string(model);
}

}  // namespace modeseek
