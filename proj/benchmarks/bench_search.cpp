#include <benchmark/benchmark.h>

#include <random>

#include "modeseek/beam.hpp"
#include "modeseek/enumeration.hpp"
#include "modeseek/exact_search.hpp"
#include "modeseek/ngram.hpp"
#include "modeseek/predictors.hpp"
#include "modeseek/synthetic.hpp"
#include "modeseek/trie_model.hpp"

using namespace modeseek;

namespace {

std::shared_ptr<const NgramModel> bench_ngram() {
  std::vector<std::vector<std::string>> corpus;
  std::mt19937_64 rng(12);
  std::vector<std::string> words{"the", "cat", "dog", "sat", "ran", "slept", "on", "mat", "log"};
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> line;
    std::size_t len = 3 + rng() % 5;
    for (std::size_t w = 0; w < len; ++w) line.push_back(words[rng() % words.size()]);
    corpus.push_back(std::move(line));
  }
  return train_ngram(corpus, 2, 0.5, 16);
}

void BM_GlobalModeFamily(benchmark::State& state) {
  LengthFamilyModel model(Rational(1, 10000), 2, static_cast<std::size_t>(state.range(0)));
  std::uint64_t nodes = 0;
  for (auto _ : state) {
    ModeResult mode = global_mode(model);
    nodes += mode.stats.nodes_expanded;
    benchmark::DoNotOptimize(mode.argmax);
  }
  state.counters["nodes/s"] =
      benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_GlobalModeFamily)->Arg(10)->Arg(14)->Arg(18);

void BM_ConditionalModeFamily(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  LengthFamilyModel model(Rational(1, 10000), 2, len);
  std::uint64_t nodes = 0;
  for (auto _ : state) {
    ModeResult mode = length_conditional_mode(model, len);
    nodes += mode.stats.nodes_expanded;
    benchmark::DoNotOptimize(mode.argmax);
  }
  state.counters["nodes/s"] =
      benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ConditionalModeFamily)->Arg(8)->Arg(12);

void BM_NgramQueries(benchmark::State& state) {
  auto model = bench_ngram();
  ModelState s = model->initial_state();
  TokenId tok = 1;
  for (auto _ : state) {
    auto logp = model->next_token_log_probs(s);
    benchmark::DoNotOptimize(logp);
  }
  benchmark::DoNotOptimize(tok);
}
BENCHMARK(BM_NgramQueries);

void BM_ConstrainedBeam(benchmark::State& state) {
  auto model = bench_ngram();
  BeamConfig config;
  config.beam_size = static_cast<std::size_t>(state.range(0));
  config.top_k = model->vocab().size();
  config.max_len = 16;
  for (auto _ : state) {
    auto out = length_constrained_beam(*model, 10, config);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ConstrainedBeam)->Arg(5)->Arg(20);

void BM_ConditionalBeam(benchmark::State& state) {
  auto model = bench_ngram();
  auto pred = exact_length_predictor(model, 16);
  BeamConfig config;
  config.beam_size = static_cast<std::size_t>(state.range(0));
  config.top_k = model->vocab().size();
  config.max_len = 16;
  for (auto _ : state) {
    auto out = conditional_beam(*model, *pred, AttributeTarget::total_length(10), config);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ConditionalBeam)->Arg(5)->Arg(20);

void BM_EnumerateSupport(benchmark::State& state) {
  Vocab v = Vocab::from_tokens({"l", "r"});
  std::vector<Sequence> seqs;
  for (int bits = 0; bits < 1024; ++bits) {
    Sequence seq;
    for (int b = 9; b >= 0; --b) seq.push_back(((bits >> b) & 1) ? 2 : 1);
    seqs.push_back(std::move(seq));
  }
  auto model = to_autoregressive(ExplicitDistribution::uniform(v, seqs));
  for (auto _ : state) {
    auto rows = enumerate_support(*model, 10);
    benchmark::DoNotOptimize(rows);
  }
}
BENCHMARK(BM_EnumerateSupport);

}  // namespace

BENCHMARK_MAIN();
