// modeseek: mode search, length-conditional search, and guided beam decoding
// over explicit, n-gram, and length-family sequence models.
//
// Exit codes: 0 success, 2 usage/parse, 3 budget exceeded (without
// --allow-partial), 4 infeasible, 5 enumeration bound.

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "modeseek/beam.hpp"
#include "modeseek/enumeration.hpp"
#include "modeseek/errors.hpp"
#include "modeseek/exact_search.hpp"
#include "modeseek/model_io.hpp"
#include "modeseek/ngram.hpp"
#include "modeseek/predictors.hpp"
#include "modeseek/synthetic.hpp"
#include "modeseek/trie_model.hpp"

using namespace modeseek;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int g_exit_code = 0;
std::chrono::steady_clock::time_point g_started;

// --------------------------------------------------------------------------
// Formatting and reports

std::string fmt_double(double v) {
  if (v == kNegInf) return "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Manifest {
  std::string command;       // argv echo
  std::string model_source;  // input file path(s)
  std::string config;        // flag echo beyond the command line
  std::uint64_t seed = 0;
  double wall_ms = 0.0;  // volatile: never written into CSV bodies
};

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;  // text-format extras

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

void render_csv(const Report& report, const Manifest& manifest, std::ostream& out) {
  out << "# tool: modeseek " << kVersion << "\n";
  out << "# command: " << manifest.command << "\n";
  if (!manifest.model_source.empty()) out << "# source: " << manifest.model_source << "\n";
  if (!manifest.config.empty()) out << "# config: " << manifest.config << "\n";
  out << "# seed: " << manifest.seed << "\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i)
    out << (i ? "," : "") << report.columns[i];
  out << "\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << "\n";
  }
}

void render_text(const Report& report, const Manifest& manifest, std::ostream& out) {
  for (const auto& note : report.notes) out << note << "\n";
  if (!report.rows.empty()) {
    for (std::size_t i = 0; i < report.columns.size(); ++i)
      out << (i ? "\t" : "") << report.columns[i];
    out << "\n";
    for (const auto& row : report.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
      out << "\n";
    }
  }
  out << "[modeseek " << kVersion << " | seed " << manifest.seed << " | " << fmt_double(manifest.wall_ms)
      << " ms]\n";
}

void render_json(const Report& report, const Manifest& manifest, std::ostream& out) {
  nlohmann::ordered_json j;
  j["manifest"] = {{"tool", std::string("modeseek ") + kVersion},
                   {"command", manifest.command},
                   {"source", manifest.model_source},
                   {"config", manifest.config},
                   {"seed", manifest.seed},
                   {"wall_ms", manifest.wall_ms}};
  j["columns"] = report.columns;
  j["rows"] = report.rows;
  j["notes"] = report.notes;
  out << j.dump(2) << "\n";
}

void emit(const Report& report, const Manifest& manifest, const std::string& format,
          const std::string& output_path) {
  Manifest timed = manifest;
  timed.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - g_started)
          .count();
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!output_path.empty()) {
    file.open(output_path);
    if (!file) throw ParseError("cannot write " + output_path);
    out = &file;
  }
  if (format == "csv")
    render_csv(report, timed, *out);
  else if (format == "json")
    render_json(report, timed, *out);
  else
    render_text(report, timed, *out);
}

// --------------------------------------------------------------------------
// Shared helpers

struct GlobalFlags {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string format = "text";
  std::string output;
};

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

template <typename T, typename F>
auto parallel_map(const std::vector<T>& items, unsigned workers, F fn)
    -> std::vector<decltype(fn(items[0]))> {
  using R = decltype(fn(items[0]));
  std::vector<R> out(items.size());
  if (items.empty()) return out;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(items.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = fn(items[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        out[i] = fn(items[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

SearchOptions search_options(std::uint64_t max_nodes, std::size_t max_depth, std::size_t tie_cap,
                             bool no_prune) {
  SearchOptions opts;
  opts.budget.max_nodes = max_nodes;
  opts.budget.max_depth = max_depth;
  opts.tie_cap = tie_cap;
  opts.prune = !no_prune;
  return opts;
}

void mode_report(const ModeResult& result, const Vocab& vocab, Report& report) {
  report.notes.push_back("exhausted: " + std::string(result.exhausted ? "yes" : "no"));
  report.notes.push_back(
      "stats: nodes_expanded=" + std::to_string(result.stats.nodes_expanded) +
      " prunes=" + std::to_string(result.stats.prunes) +
      " completes_considered=" + std::to_string(result.stats.completes_considered) +
      " full_state_rebuilds=" + std::to_string(result.stats.full_state_rebuilds) +
      " peak_cached_states=" + std::to_string(result.stats.peak_cached_states));
  report.columns = {"rank", "tokens", "logprob"};
  for (std::size_t i = 0; i < result.argmax.size(); ++i) {
    const Hypothesis& h = result.argmax[i];
    report.add_row({std::to_string(i + 1), render(vocab, h.seq), fmt_double(h.logprob)});
    if (i == 0) {
      report.notes.insert(report.notes.begin(),
                          "mode: \"" + render(vocab, h.seq) + "\" (" +
                              std::to_string(h.seq.size()) + " tokens)  logprob " +
                              fmt_double(h.logprob) + " nat / " + fmt_double(h.logprob / M_LN2) +
                              " log2" + (result.argmax.size() > 1
                                             ? "  [" + std::to_string(result.argmax.size()) +
                                                   "-way tie]"
                                             : ""));
    }
  }
}

std::shared_ptr<const AttributePredictor> make_length_predictor(
    const std::string& kind, std::shared_ptr<const AutoregressiveModel> model,
    std::size_t horizon_flag, int samples, std::uint64_t seed) {
  std::size_t horizon = horizon_flag;
  if (horizon == 0) horizon = model->max_output_length().value_or(64);
  if (kind == "exact-length") return exact_length_predictor(model, horizon);
  if (kind == "mc-length") {
    std::size_t rollout_cap = model->max_output_length().value_or(horizon);
    return monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), samples,
                                 seed, rollout_cap);
  }
  throw ParseError("unknown length predictor \"" + kind + "\"");
}

std::vector<BeamEntry> run_conditional_length(const AutoregressiveModel& model,
                                              const AttributePredictor& predictor, std::size_t len,
                                              const BeamConfig& config) {
  return conditional_beam(model, predictor, AttributeTarget::total_length(len), config);
}

// --------------------------------------------------------------------------
// Subcommands

struct ModeArgs {
  std::string model_file;
  std::uint64_t max_nodes = 1'000'000;
  std::size_t max_depth = 512;
  std::size_t tie_cap = 16;
  bool no_prune = false;
  bool no_cache = false;
  bool allow_partial = false;
  long length = -1;  // cond-mode only
};

void cmd_mode(const ModeArgs& args, const GlobalFlags& flags, Manifest& manifest, bool conditional) {
  auto model = load_model_file(args.model_file);
  SearchOptions opts = search_options(args.max_nodes, args.max_depth, args.tie_cap, args.no_prune);
  opts.cache_states = !args.no_cache;
  ModeResult result;
  if (conditional) {
    if (args.length < 0) throw ParseError("cond-mode requires --length");
    result = length_conditional_mode(*model, static_cast<std::size_t>(args.length), opts);
  } else {
    result = global_mode(*model, opts);
  }
  Report report;
  mode_report(result, model->vocab(), report);
  if (!result.exhausted && !args.allow_partial) g_exit_code = 3;
  emit(report, manifest, flags.format, flags.output);
}

struct BeamArgs {
  std::string model_file;
  std::string method = "plain";
  long length = -1;
  std::string predictor = "exact-length";
  std::string token;
  std::size_t beam = 5;
  std::size_t top_k = 500;
  double alpha = 1.0;
  int samples = 1000;
  std::size_t horizon = 0;
  std::size_t max_len = 0;
};

void cmd_beam(const BeamArgs& args, const GlobalFlags& flags, Manifest& manifest) {
  auto model = load_model_file(args.model_file);
  BeamConfig config;
  config.beam_size = args.beam;
  config.top_k = args.top_k;
  config.alpha = args.alpha;
  config.max_len = args.max_len ? args.max_len : model->max_output_length().value_or(64);

  std::vector<BeamEntry> out;
  bool guided = false;
  if (args.method == "plain") {
    out = beam_search(*model, config);
  } else if (args.method == "constrained") {
    if (args.length < 0) throw ParseError("--method constrained requires --length");
    out = length_constrained_beam(*model, static_cast<std::size_t>(args.length), config);
  } else if (args.method == "conditional") {
    guided = true;
    if (args.predictor == "first-token") {
      if (args.token.empty()) throw ParseError("--predictor first-token requires --token");
      auto pred = first_token_predictor(model->vocab().id_of(args.token));
      out = conditional_beam(*model, *pred, AttributeTarget::fixed(1), config);
    } else {
      if (args.length < 0) throw ParseError("--method conditional requires --length");
      auto pred =
          make_length_predictor(args.predictor, model, args.horizon, args.samples, flags.seed);
      out = run_conditional_length(*model, *pred, static_cast<std::size_t>(args.length), config);
    }
  } else {
    throw ParseError("unknown beam method \"" + args.method + "\"");
  }

  Report report;
  report.columns = {"rank", "tokens", "logprob", "guidance"};
  for (std::size_t i = 0; i < out.size(); ++i) {
    report.add_row({std::to_string(i + 1), render(model->vocab(), out[i].hypothesis.seq),
                    fmt_double(out[i].hypothesis.logprob),
                    guided ? fmt_double(out[i].guidance) : std::string()});
  }
  report.notes.push_back("method: " + args.method + "  beam=" + std::to_string(args.beam) +
                         " k=" + std::to_string(args.top_k) + " alpha=" + fmt_double(args.alpha));
  if (out.empty()) report.notes.push_back("no completed hypotheses");
  emit(report, manifest, flags.format, flags.output);
}

struct WinrateArgs {
  std::string model_file;
  std::vector<std::size_t> lengths;
  std::vector<double> ratios;
  std::string references;
  std::string predictor = "exact-length";
  std::size_t beam = 5;
  std::size_t top_k = 500;
  double alpha = 1.0;
  int samples = 1000;
  std::size_t horizon = 0;
  std::size_t max_len = 0;
};

void cmd_winrate(const WinrateArgs& args, const GlobalFlags& flags, Manifest& manifest) {
  if (args.lengths.empty() == args.ratios.empty())
    throw ParseError("winrate needs exactly one of --lengths or --length-ratios");
  auto model = load_model_file(args.model_file);
  BeamConfig config;
  config.beam_size = args.beam;
  config.top_k = args.top_k;
  config.alpha = args.alpha;
  config.max_len = args.max_len ? args.max_len : model->max_output_length().value_or(64);
  auto predictor =
      make_length_predictor(args.predictor, model, args.horizon, args.samples, flags.seed);

  std::vector<std::size_t> reference_lengths;
  if (!args.ratios.empty()) {
    if (args.references.empty()) throw ParseError("--length-ratios requires --references");
    std::ifstream in(args.references);
    if (!in) throw ParseError("cannot open references file " + args.references);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      reference_lengths.push_back(static_cast<std::size_t>(std::stoul(line)));
    }
    if (reference_lengths.empty()) throw ParseError("references file has no lengths");
  }

  // One aligned comparison per (row value, input); a method that returns no
  // output scores -inf.
  auto top_score = [](const std::vector<BeamEntry>& entries) {
    return entries.empty() ? Hypothesis{{}, kNegInf, true} : entries.front().hypothesis;
  };
  auto compare_at = [&](std::size_t len) -> std::pair<Hypothesis, Hypothesis> {
    Hypothesis cond, constr;
    try {
      cond = top_score(run_conditional_length(*model, *predictor, len, config));
    } catch (const NoFeasibleSequence&) {
      cond = Hypothesis{{}, kNegInf, true};
    }
    try {
      constr = top_score(length_constrained_beam(*model, len, config));
    } catch (const NoFeasibleSequence&) {
      constr = Hypothesis{{}, kNegInf, true};
    }
    return {cond, constr};
  };

  Report report;
  report.columns = {"length_ratio_or_L", "method_a", "method_b", "frac_a",
                    "frac_tie",          "frac_b",   "beam_size", "k",
                    "alpha"};
  auto add_result = [&](const std::string& key, const WinrateResult& w) {
    report.add_row({key, "conditional", "constrained", fmt_double(w.frac_a),
                    fmt_double(w.frac_tie), fmt_double(w.frac_b), std::to_string(args.beam),
                    std::to_string(args.top_k), fmt_double(args.alpha)});
  };

  if (!args.lengths.empty()) {
    auto pairs = parallel_map(args.lengths, flags.workers, compare_at);
    for (std::size_t i = 0; i < args.lengths.size(); ++i) {
      std::vector<Hypothesis> a{pairs[i].first}, b{pairs[i].second};
      add_result(std::to_string(args.lengths[i]), winrate(a, b));
    }
  } else {
    for (double ratio : args.ratios) {
      std::vector<std::size_t> lens;
      lens.reserve(reference_lengths.size());
      for (std::size_t ref : reference_lengths)
        lens.push_back(static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ref))));
      auto pairs = parallel_map(lens, flags.workers, compare_at);
      std::vector<Hypothesis> a, b;
      for (auto& [cond, constr] : pairs) {
        a.push_back(cond);
        b.push_back(constr);
      }
      add_result(fmt_double(ratio), winrate(a, b));
    }
  }
  emit(report, manifest, flags.format, flags.output);
}

struct FiguresArgs {
  std::string family_spec;
  std::string out_dir;
  std::uint64_t max_nodes = 1'000'000;
  std::size_t max_depth = 512;
  bool allow_partial = false;
};

void cmd_replicate_figures(const FiguresArgs& args, const GlobalFlags& flags, Manifest& manifest) {
  std::ifstream in(args.family_spec);
  if (!in) throw ParseError("cannot open family spec " + args.family_spec);
  nlohmann::ordered_json spec = nlohmann::ordered_json::parse(in, nullptr, false);
  if (spec.is_discarded()) throw ParseError("invalid JSON in " + args.family_spec);

  std::vector<EmptyModeEntry> entries;
  try {
    for (const auto& family : spec.at("families")) {
      std::string label = family.at("label").get<std::string>();
      Rational q0 = Rational::parse(family.at("q").get<std::string>());
      int branching = family.at("branching").get<int>();
      std::string decay = family.value("q_decay", "none");
      for (const auto& jlen : family.at("lengths")) {
        std::size_t len = jlen.get<std::size_t>();
        Rational q = q0;
        if (decay == "inverse_length")
          q = q0 / Rational(static_cast<long>(len));
        else if (decay != "none")
          throw ParseError("unknown q_decay \"" + decay + "\"");
        entries.push_back({label, static_cast<int>(len),
                           std::make_shared<LengthFamilyModel>(q, branching, len)});
      }
    }
  } catch (const nlohmann::ordered_json::exception& e) {
    throw ParseError(std::string("malformed family spec: ") + e.what());
  }
  if (entries.empty()) throw ParseError("family spec defines no models");

  SearchOptions opts = search_options(args.max_nodes, args.max_depth, 16, false);
  // Fan out per model, then merge singleton rows per (label, bin).
  auto singles = parallel_map(entries, flags.workers, [&](const EmptyModeEntry& entry) {
    return empty_mode_report({entry}, opts).front();
  });
  std::map<std::pair<std::string, int>, std::vector<EmptyModeRow>> grouped;
  for (auto& row : singles) grouped[{row.label, row.length_bin}].push_back(row);
  std::vector<EmptyModeRow> rows;
  for (auto& [key, members] : grouped) {
    EmptyModeRow merged{key.first, key.second, 0.0, 0.0, 0.0};
    double log_sum = 0.0;
    for (const auto& m : members) {
      merged.frac_empty_mode += m.frac_empty_mode;
      merged.frac_exhausted += m.frac_exhausted;
      log_sum += std::log(m.geomean_p_empty);
    }
    double n = static_cast<double>(members.size());
    merged.frac_empty_mode /= n;
    merged.frac_exhausted /= n;
    merged.geomean_p_empty = std::exp(log_sum / n);
    rows.push_back(merged);
  }

  std::filesystem::create_directories(args.out_dir);
  auto write_csv = [&](const std::string& name, const std::vector<std::string>& columns,
                       auto field_fn) {
    Report report;
    report.columns = columns;
    for (const auto& row : rows) report.add_row(field_fn(row));
    std::ofstream out(std::filesystem::path(args.out_dir) / name);
    if (!out) throw ParseError("cannot write " + name + " in " + args.out_dir);
    render_csv(report, manifest, out);
  };
  // Both figures share the fixed report row schema; the file name says which
  // column to plot.
  auto full_row = [](const EmptyModeRow& r) {
    return std::vector<std::string>{r.label, std::to_string(r.length_bin),
                                    fmt_double(r.frac_empty_mode), fmt_double(r.geomean_p_empty),
                                    fmt_double(r.frac_exhausted)};
  };
  const std::vector<std::string> schema{"label", "length_bin", "frac_empty_mode",
                                        "geomean_p_empty", "frac_exhausted"};
  write_csv("empty_mode_rate.csv", schema, full_row);
  write_csv("empty_mode_geomean.csv", schema, full_row);

  bool all_exhausted = true;
  for (const auto& row : rows) all_exhausted &= row.frac_exhausted == 1.0;
  if (!all_exhausted && !args.allow_partial) g_exit_code = 3;

  Report summary;
  summary.notes.push_back("wrote empty_mode_rate.csv and empty_mode_geomean.csv to " +
                          args.out_dir + " (" + std::to_string(rows.size()) + " bins)");
  emit(summary, manifest, flags.format, flags.output);
}

struct OracleArgs {
  std::string model_file;
  std::size_t max_len = 0;
  long length_filter = -1;
};

void cmd_oracle(const OracleArgs& args, const GlobalFlags& flags, Manifest& manifest) {
  auto model = load_model_file(args.model_file);
  std::size_t max_len = args.max_len;
  if (max_len == 0) {
    auto bound = model->max_output_length();
    if (!bound) throw ParseError("oracle: model has no length bound, pass --max-len");
    max_len = *bound;
  }
  // The 1e7-sequence bound is enforced on the actual enumeration, so sparse
  // supports stay listable even when |V|^max_len is astronomical.
  auto rows = enumerate_support(*model, max_len);
  sort_by_probability(rows);

  Report report;
  report.columns = {"rank", "tokens", "probability"};
  std::size_t rank = 0;
  double total = 0.0;
  for (const auto& row : rows) {
    total += std::exp(row.logprob);
    if (args.length_filter >= 0 &&
        row.seq.size() != static_cast<std::size_t>(args.length_filter))
      continue;
    report.add_row({std::to_string(++rank), render(model->vocab(), row.seq),
                    fmt_double(std::exp(row.logprob))});
  }
  report.notes.push_back("support: " + std::to_string(rows.size()) +
                         " sequences, total mass " + fmt_double(total));
  emit(report, manifest, flags.format, flags.output);
}

struct TrainArgs {
  std::string corpus_file;
  std::string out_file;
  int order = 2;
  double alpha = 0.5;
  std::size_t max_len = 64;
  bool char_mode = false;
};

void cmd_train_ngram(const TrainArgs& args, const GlobalFlags& flags, Manifest& manifest) {
  std::ifstream in(args.corpus_file);
  if (!in) throw ParseError("cannot open corpus " + args.corpus_file);
  auto corpus = read_corpus(in, args.char_mode);
  // Drop empty lines: they would train EOS-only events at the start context.
  std::erase_if(corpus, [](const auto& line) { return line.empty(); });
  auto model = train_ngram(corpus, args.order, args.alpha, args.max_len);
  save_model_file(*model, args.out_file);

  Report report;
  report.notes.push_back("trained order-" + std::to_string(args.order) + " model: vocab " +
                         std::to_string(model->vocab().size()) + ", contexts " +
                         std::to_string(model->counts().size()) + ", alpha " +
                         fmt_double(args.alpha) + ", max_len " + std::to_string(args.max_len));
  report.notes.push_back("wrote " + args.out_file);
  emit(report, manifest, flags.format, flags.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mode search and guided decoding for autoregressive sequence models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("modeseek ") + kVersion);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "global random seed")->capture_default_str();
  app.add_option("--workers", flags.workers, "worker threads for fan-out commands")
      ->capture_default_str();
  app.add_option("--format", flags.format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  app.add_option("-o,--output", flags.output, "write the report to a file instead of stdout");

  ModeArgs mode_args;
  auto add_search_flags = [](CLI::App* cmd, ModeArgs& args) {
    cmd->add_option("model", args.model_file, "model file (JSON model or distribution TSV)")
        ->required();
    cmd->add_option("--max-nodes", args.max_nodes, "node expansion budget")->capture_default_str();
    cmd->add_option("--max-depth", args.max_depth, "depth cap")->capture_default_str();
    cmd->add_option("--tie-cap", args.tie_cap, "maximum tied argmax hypotheses reported")
        ->capture_default_str();
    cmd->add_flag("--no-prune", args.no_prune, "disable incumbent pruning");
    cmd->add_flag("--no-cache", args.no_cache, "retain full states at every node");
    cmd->add_flag("--allow-partial", args.allow_partial,
                  "exit 0 even when the budget was exhausted");
  };
  CLI::App* mode_cmd = app.add_subcommand("mode", "exact unconditional mode search");
  mode_cmd->fallthrough();
  add_search_flags(mode_cmd, mode_args);

  ModeArgs cond_args;
  CLI::App* cond_cmd = app.add_subcommand("cond-mode", "exact length-conditional mode search");
  cond_cmd->fallthrough();
  add_search_flags(cond_cmd, cond_args);
  cond_cmd->add_option("--length", cond_args.length, "target output length")->required();

  BeamArgs beam_args;
  CLI::App* beam_cmd = app.add_subcommand("beam", "plain, constrained, or conditional beam search");
  beam_cmd->fallthrough();
  beam_cmd->add_option("model", beam_args.model_file, "model file")->required();
  beam_cmd->add_option("--method", beam_args.method, "plain | constrained | conditional")
      ->check(CLI::IsMember({"plain", "constrained", "conditional"}))
      ->capture_default_str();
  beam_cmd->add_option("--length", beam_args.length, "target output length");
  beam_cmd->add_option("--predictor", beam_args.predictor,
                       "exact-length | mc-length | first-token")
      ->capture_default_str();
  beam_cmd->add_option("--token", beam_args.token, "target token for first-token conditioning");
  beam_cmd->add_option("--beam", beam_args.beam, "beam size")->capture_default_str();
  beam_cmd->add_option("--k", beam_args.top_k, "candidate continuations per hypothesis")
      ->capture_default_str();
  beam_cmd->add_option("--alpha", beam_args.alpha, "guidance weight")->capture_default_str();
  beam_cmd->add_option("--samples", beam_args.samples, "Monte Carlo samples per query")
      ->capture_default_str();
  beam_cmd->add_option("--horizon", beam_args.horizon, "length predictor horizon (0 = model bound)");
  beam_cmd->add_option("--max-len", beam_args.max_len, "beam length cap (0 = model bound)");

  WinrateArgs winrate_args;
  CLI::App* winrate_cmd =
      app.add_subcommand("winrate", "conditional vs constrained beam likelihood comparison");
  winrate_cmd->fallthrough();
  winrate_cmd->add_option("model", winrate_args.model_file, "model file")->required();
  winrate_cmd->add_option("--lengths", winrate_args.lengths, "target lengths")->delimiter(',');
  winrate_cmd->add_option("--length-ratios", winrate_args.ratios, "ratios of reference lengths")
      ->delimiter(',');
  winrate_cmd->add_option("--references", winrate_args.references,
                          "file with one reference length per input line");
  winrate_cmd->add_option("--predictor", winrate_args.predictor, "exact-length | mc-length")
      ->capture_default_str();
  winrate_cmd->add_option("--beam", winrate_args.beam, "beam size")->capture_default_str();
  winrate_cmd->add_option("--k", winrate_args.top_k, "candidates per hypothesis")
      ->capture_default_str();
  winrate_cmd->add_option("--alpha", winrate_args.alpha, "guidance weight")->capture_default_str();
  winrate_cmd->add_option("--samples", winrate_args.samples, "Monte Carlo samples per query")
      ->capture_default_str();
  winrate_cmd->add_option("--horizon", winrate_args.horizon, "length predictor horizon");
  winrate_cmd->add_option("--max-len", winrate_args.max_len, "beam length cap (0 = model bound)");

  FiguresArgs figures_args;
  CLI::App* figures_cmd =
      app.add_subcommand("replicate-figures", "empty-mode rate and geomean P(empty) CSV pair");
  figures_cmd->fallthrough();
  figures_cmd->add_option("family_spec", figures_args.family_spec, "length-family spec JSON")
      ->required();
  figures_cmd->add_option("out_dir", figures_args.out_dir, "output directory")->required();
  figures_cmd->add_option("--max-nodes", figures_args.max_nodes, "node budget per search")
      ->capture_default_str();
  figures_cmd->add_option("--max-depth", figures_args.max_depth, "depth cap")
      ->capture_default_str();
  figures_cmd->add_flag("--allow-partial", figures_args.allow_partial,
                        "exit 0 even when some searches hit the budget");

  OracleArgs oracle_args;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "full enumeration listing sorted by probability");
  oracle_cmd->fallthrough();
  oracle_cmd->add_option("model", oracle_args.model_file, "model file")->required();
  oracle_cmd->add_option("--max-len", oracle_args.max_len, "enumeration depth (0 = model bound)");
  oracle_cmd->add_option("--length", oracle_args.length_filter,
                         "only list sequences of this length");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train-ngram", "train an add-alpha n-gram model");
  train_cmd->fallthrough();
  train_cmd->add_option("corpus", train_args.corpus_file, "corpus file, one sequence per line")
      ->required();
  train_cmd->add_option("-o,--output-model", train_args.out_file, "model JSON output path")
      ->required();
  train_cmd->add_option("--order", train_args.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--alpha", train_args.alpha, "add-alpha smoothing")->capture_default_str();
  train_cmd->add_option("--max-len", train_args.max_len, "hard sequence length cap")
      ->capture_default_str();
  train_cmd->add_flag("--char", train_args.char_mode, "split lines into characters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Manifest manifest;
  manifest.command = join_args(argc, argv);
  manifest.seed = flags.seed;
  g_started = std::chrono::steady_clock::now();

  try {
    if (mode_cmd->parsed()) {
      manifest.model_source = mode_args.model_file;
      cmd_mode(mode_args, flags, manifest, false);
    } else if (cond_cmd->parsed()) {
      manifest.model_source = cond_args.model_file;
      cmd_mode(cond_args, flags, manifest, true);
    } else if (beam_cmd->parsed()) {
      manifest.model_source = beam_args.model_file;
      manifest.config = "method=" + beam_args.method;
      cmd_beam(beam_args, flags, manifest);
    } else if (winrate_cmd->parsed()) {
      manifest.model_source = winrate_args.model_file;
      cmd_winrate(winrate_args, flags, manifest);
    } else if (figures_cmd->parsed()) {
      manifest.model_source = figures_args.family_spec;
      cmd_replicate_figures(figures_args, flags, manifest);
    } else if (oracle_cmd->parsed()) {
      manifest.model_source = oracle_args.model_file;
      cmd_oracle(oracle_args, flags, manifest);
    } else if (train_cmd->parsed()) {
      manifest.model_source = train_args.corpus_file;
      cmd_train_ngram(train_args, flags, manifest);
    }
  } catch (const NoFeasibleSequence& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const EnumerationBound& e) {
    std::cerr << "enumeration bound: " << e.what() << "\n";
    return 5;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return g_exit_code;
}
