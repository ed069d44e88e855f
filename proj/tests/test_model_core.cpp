#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "modeseek/errors.hpp"
#include "modeseek/model.hpp"
#include "modeseek/model_io.hpp"
#include "modeseek/ngram.hpp"
#include "modeseek/synthetic.hpp"
#include "modeseek/trie_model.hpp"
#include "test_util.hpp"

using namespace modeseek;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const TrieModel> tiny_model() {
  // P("") = 1/2, P("a") = 1/2  =>  P(EOS | start) = 1/2.
  Vocab v = Vocab::from_tokens({"a"});
  std::map<Sequence, Rational> entries;
  entries[{}] = Rational(1, 2);
  entries[{1}] = Rational(1, 2);
  return to_autoregressive(ExplicitDistribution(v, std::move(entries)));
}

ExplicitDistribution uniform_tokens(const Vocab& vocab, TokenId first, int count) {
  std::vector<Sequence> seqs;
  for (int i = 0; i < count; ++i) seqs.push_back({first + i});
  return ExplicitDistribution::uniform(vocab, seqs);
}

}  // namespace

TEST_CASE("vocab basics") {
  Vocab v = Vocab::from_tokens({"a", "b"});
  CHECK(v.size() == 3);
  CHECK(v.token(kEosId) == "</s>");
  CHECK(v.id_of("b") == 2);
  CHECK_THROWS_AS(v.id_of("zzz"), InvalidToken);
  CHECK_THROWS_AS(Vocab::from_tokens({"a", "a"}), InvalidToken);
  CHECK_THROWS_AS(Vocab::from_full({"a"}), InvalidToken);  // no EOS at index 0
}

TEST_CASE("sequence_log_prob: single EOS factor") {
  auto model = tiny_model();
  CHECK(sequence_log_prob(*model, {}, true) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(sequence_log_prob(*model, {}, false) == 0.0);
  CHECK_THROWS_AS(sequence_log_prob(*model, {7}, true), InvalidToken);
  CHECK_THROWS_AS(sequence_log_prob(*model, {kEosId}, true), InvalidToken);
}

TEST_CASE("sequence_log_prob: uniform mass over 20 sequences") {
  std::vector<std::string> tokens;
  for (int i = 0; i < 20; ++i) tokens.push_back("t" + std::to_string(i));
  Vocab v = Vocab::from_tokens(tokens);
  auto model = to_autoregressive(uniform_tokens(v, 1, 20));
  for (TokenId id = 1; id <= 20; ++id)
    CHECK(sequence_log_prob(*model, {id}, true) ==
          doctest::Approx(std::log(1.0 / 20.0)).epsilon(1e-12));
}

TEST_CASE("sequence_log_prob: bigram chain-rule factors") {
  // Hand counts on {"a b", "a b", "a c"}: P(a|start)=1, P(b|a)=2/3, P(EOS|b)=1.
  auto model = train_ngram({{"a", "b"}, {"a", "b"}, {"a", "c"}}, 2, 0.0, 8);
  const double expected = std::log(1.0) + std::log(2.0 / 3.0) + std::log(1.0);
  Sequence ab = {model->vocab().id_of("a"), model->vocab().id_of("b")};
  CHECK(sequence_log_prob(*model, ab, true) == doctest::Approx(expected).epsilon(1e-12));
  // Zero-mass factor: "b" cannot start a sequence under alpha = 0.
  CHECK(sequence_log_prob(*model, {model->vocab().id_of("b")}, true) == -kInf);
}

TEST_CASE("sample: degenerate distribution ignores the seed") {
  Vocab v = Vocab::from_tokens({"x", "y"});
  std::map<Sequence, Rational> entries;
  entries[{1, 2, 1}] = Rational(1);
  auto model = to_autoregressive(ExplicitDistribution(v, std::move(entries)));
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    Hypothesis h = sample(*model, seed, 16);
    CHECK(h.seq == Sequence{1, 2, 1});
    CHECK(h.complete);
    CHECK(h.logprob == 0.0);
  }
}

TEST_CASE("sample: mixture noise frequencies match epsilon / M") {
  std::vector<std::string> tokens;
  for (int i = 0; i < 20; ++i) tokens.push_back("c" + std::to_string(i));
  for (int i = 0; i < 10; ++i) tokens.push_back("n" + std::to_string(i));
  Vocab v = Vocab::from_tokens(tokens);
  MixtureSpec spec{uniform_tokens(v, 1, 20), uniform_tokens(v, 21, 10), Rational(1, 10)};
  auto model = to_autoregressive(build_mixture(spec));

  const int n = 100000;
  std::vector<int> hits(31, 0);
  for (int s = 0; s < n; ++s) {
    Hypothesis h = sample(*model, static_cast<std::uint64_t>(s), 4);
    REQUIRE(h.complete);
    REQUIRE(h.seq.size() == 1);
    ++hits[static_cast<std::size_t>(h.seq[0])];
  }
  for (TokenId id = 21; id <= 30; ++id)
    CHECK(static_cast<double>(hits[static_cast<std::size_t>(id)]) / n ==
          doctest::Approx(0.01).epsilon(0.2));  // 0.01 +/- 0.002
}

TEST_CASE("sample: truncation leaves the hypothesis incomplete") {
  Vocab v = Vocab::from_tokens({"x"});
  std::map<Sequence, Rational> entries;
  entries[{1, 1, 1}] = Rational(1);
  auto model = to_autoregressive(ExplicitDistribution(v, std::move(entries)));
  Hypothesis h = sample(*model, 0, 2);
  CHECK_FALSE(h.complete);
  CHECK(h.seq == Sequence{1, 1});
}

TEST_CASE("typo channel: corrupted-word count matches the error rate") {
  auto make_clean = [](int words) {
    std::vector<std::string> tokens;
    for (int i = 0; i < words; ++i) tokens.push_back("w" + std::to_string(i));
    Vocab v = Vocab::from_tokens(tokens);
    Sequence seq;
    for (TokenId id = 1; id <= words; ++id) seq.push_back(id);
    return ExplicitDistribution::uniform(v, {seq});
  };
  auto variants_for = [](const ExplicitDistribution& clean, int per_word) {
    std::map<std::string, std::vector<std::string>> variants;
    for (std::size_t id = 1; id < clean.vocab().size(); ++id) {
      const std::string& w = clean.vocab().tokens()[id];
      for (int k = 0; k < per_word; ++k) variants[w].push_back(w + "~" + std::to_string(k));
    }
    return variants;
  };

  // Oracle first: on a 3-word instance the enumerated expectation is 3p.
  {
    ExplicitDistribution clean = make_clean(3);
    ExplicitDistribution noisy = typo_channel(clean, Rational(1, 10), variants_for(clean, 2));
    double expected_errors = 0.0;
    for (const auto& [seq, p] : noisy.entries()) {
      int errors = 0;
      for (std::size_t i = 0; i < seq.size(); ++i)
        if (seq[i] != static_cast<TokenId>(i + 1)) ++errors;
      expected_errors += p.to_double() * errors;
    }
    CHECK(expected_errors == doctest::Approx(0.3).epsilon(1e-12));
  }

  // Then the sampling check on the 10-word instance.
  ExplicitDistribution clean = make_clean(10);
  auto model = to_autoregressive(typo_channel(clean, Rational(1, 10), variants_for(clean, 2)));
  const int n = 100000;
  long long total_errors = 0;
  for (int s = 0; s < n; ++s) {
    Hypothesis h = sample(*model, static_cast<std::uint64_t>(s), 16);
    REQUIRE(h.complete);
    REQUIRE(h.seq.size() == 10);
    for (std::size_t i = 0; i < h.seq.size(); ++i)
      if (h.seq[i] != static_cast<TokenId>(i + 1)) ++total_errors;
  }
  CHECK(static_cast<double>(total_errors) / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("normalization holds at every reachable state") {
  std::mt19937_64 rng(7);
  std::vector<std::shared_ptr<const AutoregressiveModel>> models;
  for (int i = 0; i < 10; ++i) models.push_back(to_autoregressive(testutil::random_distribution(rng)));
  models.push_back(train_ngram({{"a", "b"}, {"b"}, {"a", "a", "b"}}, 2, 0.5, 6));
  models.push_back(std::make_shared<LengthFamilyModel>(Rational(1, 100), 2, 5));

  for (const auto& model : models) {
    // BFS over reachable states up to the model bound.
    std::vector<ModelState> frontier{model->initial_state()};
    std::size_t depth_cap = model->max_output_length().value_or(6);
    for (std::size_t depth = 0; depth <= depth_cap && !frontier.empty(); ++depth) {
      std::vector<ModelState> next;
      for (const auto& state : frontier) {
        std::vector<double> logp = model->next_token_log_probs(state);
        double total = 0.0;
        for (double lp : logp)
          if (lp != -kInf) total += std::exp(lp);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        if (depth == depth_cap) continue;
        for (std::size_t id = 1; id < logp.size(); ++id)
          if (logp[id] != -kInf) next.push_back(model->step(state, static_cast<TokenId>(id)));
      }
      frontier = std::move(next);
      if (frontier.size() > 512) frontier.resize(512);
    }
  }
}

TEST_CASE("state replay reproduces next-token distributions") {
  auto model = train_ngram({{"a", "b", "a"}, {"b", "a"}, {"a", "a"}}, 3, 0.25, 8);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Hypothesis h = sample(*model, rng(), 8);
    ModelState incremental = model->initial_state();
    for (TokenId id : h.seq) incremental = model->step(incremental, id);
    ModelState replayed = model->initial_state();
    for (TokenId id : h.seq) replayed = model->step(replayed, id);
    auto a = model->next_token_log_probs(incremental);
    auto b = model->next_token_log_probs(replayed);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == -kInf)
        CHECK(b[i] == -kInf);
      else
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("complete-sequence mass sums to one") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = to_autoregressive(testutil::random_distribution(rng));
    double total = 0.0;
    for (const auto& [seq, lp] : testutil::oracle_support(*model, 5)) {
      total += std::exp(lp);
      CHECK(lp == doctest::Approx(sequence_log_prob(*model, seq, true)).epsilon(1e-12));
      CHECK(lp <= 0.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("states carry accounting sizes") {
  auto trie = tiny_model();
  CHECK(trie->initial_state().size_bytes() > 0);

  auto bigram = train_ngram({{"a", "b"}}, 2, 0.5, 8);
  auto trigram = train_ngram({{"a", "b"}}, 3, 0.5, 8);
  CHECK(trigram->initial_state().size_bytes() > bigram->initial_state().size_bytes());
}

TEST_CASE("distribution TSV round-trips") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    ExplicitDistribution dist = testutil::random_distribution(rng);
    std::stringstream buffer;
    dist.save_tsv(buffer);
    ExplicitDistribution reloaded = ExplicitDistribution::load_tsv(buffer);
    // Token ids may be renumbered by first appearance; compare rendered text.
    REQUIRE(reloaded.support_size() == dist.support_size());
    std::map<std::string, Rational> want, got;
    for (const auto& [seq, p] : dist.entries()) want.emplace(render(dist.vocab(), seq), p);
    for (const auto& [seq, p] : reloaded.entries()) got.emplace(render(reloaded.vocab(), seq), p);
    CHECK(want == got);
  }
}

TEST_CASE("model JSON round-trips bit-exactly") {
  std::mt19937_64 rng(23);
  auto trie = to_autoregressive(testutil::random_distribution(rng));
  auto ngram = train_ngram({{"a", "b"}, {"b", "b"}, {"a"}}, 2, 0.75, 12);
  auto family = std::make_shared<LengthFamilyModel>(Rational(1, 10000), 2, 14);
  std::vector<std::shared_ptr<const AutoregressiveModel>> models{trie, ngram, family};
  for (const auto& model : models) {
    std::string first = model_to_string(*model);
    auto reloaded = model_from_json(nlohmann::ordered_json::parse(first));
    CHECK(model_to_string(*reloaded) == first);
    CHECK(reloaded->kind() == model->kind());
  }
}
