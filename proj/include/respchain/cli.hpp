#pragma once

// Subcommand orchestration behind the `respchain` executable. Every number in
// a report comes from the library; this layer only selects inputs, calls the
// right operations and arranges the results.

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "respchain/chain_core.hpp"
#include "respchain/diagnostics.hpp"
#include "respchain/error.hpp"
#include "respchain/io/cohort_csv.hpp"
#include "respchain/io/config.hpp"
#include "respchain/io/report.hpp"
#include "respchain/io/roc_svg.hpp"
#include "respchain/likelihood.hpp"
#include "respchain/simulate.hpp"
#include "respchain/stat_tests.hpp"
#include "respchain/theoretical_models.hpp"

namespace respchain::cli {

using io::json;

struct Options {
  std::string command;
  std::optional<std::string> input;
  std::optional<std::string> config_path;
  std::optional<std::string> report_path;

  // Config overrides; unset means "use the config value".
  std::optional<std::size_t> states;
  std::optional<std::string> state_labels;
  std::optional<double> tolerance;
  std::optional<int> max_power;
  std::optional<double> epsilon_floor;
  std::optional<double> smoothing_alpha;
  std::optional<double> cutoff;
  std::optional<std::string> mode;

  // Names of groups in the input or of models.
  std::vector<std::string> groups;
  std::vector<std::string> models;
  std::optional<std::string> numerator;
  std::optional<std::string> denominator;
  std::optional<std::string> reference;
  std::optional<std::string> focal;
  std::optional<std::string> positive;

  std::vector<std::string> sequences; // inline digit strings
  std::optional<double> n;
  int powers = 0;

  std::size_t length = 16;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<std::string> label;
  std::string id_prefix = "S";
  std::optional<std::string> output;
  std::optional<std::string> roc_csv;
  std::optional<std::string> total_roc_csv;
  std::optional<std::string> svg;
};

/// Config file (explicit, then environment default) with flag overrides applied.
inline io::Config effective_config(const Options &o) {
  io::Config cfg = io::resolve_config(o.config_path);
  const auto set = [&](const char *key, const auto &value) {
    if (value) {
      std::ostringstream os;
      os << std::setprecision(17) << *value;
      io::apply_setting(cfg, key, os.str());
    }
  };
  set("states", o.states);
  set("state_labels", o.state_labels);
  set("tolerance", o.tolerance);
  set("max_power", o.max_power);
  set("epsilon_floor", o.epsilon_floor);
  set("smoothing_alpha", o.smoothing_alpha);
  set("cutoff", o.cutoff);
  set("mode", o.mode);
  cfg.state_space();
  return cfg;
}

namespace detail {

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Context {
  const Options &opts;
  const io::Config &cfg;
  StateSpace space;
  std::optional<io::CohortDataset> data;
  io::Report report;
};

inline Context make_context(const Options &o, const io::Config &cfg, std::string command) {
  Context ctx{o, cfg, cfg.state_space(), std::nullopt, {}};
  ctx.report.command = std::move(command);
  json inputs = json::object();
  if (o.input) {
    const std::string text = read_file(*o.input);
    ctx.data = io::parse_cohort(text, ctx.space, cfg.mode, *o.input);
    inputs["cohort"] = json{{"path", *o.input}, {"fnv1a64", io::hex64(io::fnv1a64(text))}};
    for (const auto &w : ctx.data->warnings)
      ctx.report.warnings.push_back(w);
  }
  ctx.report.provenance = json{{"tool", "respchain"},
                               {"tool_version", io::kToolVersion},
                               {"inputs", inputs},
                               {"config", io::to_json(cfg)}};
  return ctx;
}

inline const io::CohortDataset &require_data(const Context &ctx) {
  if (!ctx.data)
    throw ValidationError(ctx.report.command + ": --input is required");
  return *ctx.data;
}

inline std::vector<ResponseSequence> sorted_by_id(std::vector<ResponseSequence> v) {
  std::sort(v.begin(), v.end(), [](const auto &a, const auto &b) {
    return a.participant_id < b.participant_id;
  });
  return v;
}

/// Sequences to analyse: the input cohort, then any inline --sequence values.
inline std::vector<ResponseSequence> analysis_sequences(const Context &ctx) {
  std::vector<ResponseSequence> out;
  if (ctx.data)
    out = sorted_by_id(ctx.data->sequences);
  for (std::size_t i = 0; i < ctx.opts.sequences.size(); ++i) {
    auto s = make_sequence("arg" + std::to_string(i + 1), ctx.opts.sequences[i]);
    validate_states(s, ctx.space);
    out.push_back(std::move(s));
  }
  if (out.empty())
    throw ValidationError(ctx.report.command + ": no sequences (use --input or --sequence)");
  for (const auto &s : out)
    validate_for_transitions(s, ctx.space);
  return out;
}

inline std::optional<std::string> find_group(const Context &ctx, const std::string &name) {
  if (!ctx.data)
    return std::nullopt;
  const auto want = io::detail::lower(name);
  for (const auto &g : ctx.data->group_labels)
    if (io::detail::lower(g) == want)
      return g;
  return std::nullopt;
}

inline std::vector<ResponseSequence> group_members(const Context &ctx, const std::string &group) {
  std::vector<ResponseSequence> out;
  for (const auto *s : ctx.data->in_group(group))
    out.push_back(*s);
  return sorted_by_id(std::move(out));
}

inline TransitionCounts pooled(const Context &ctx, const std::vector<ResponseSequence> &seqs) {
  std::vector<TransitionCounts> counts;
  for (const auto &s : seqs) {
    validate_for_transitions(s, ctx.space);
    counts.push_back(count_transitions(s, ctx.space));
  }
  return pool_counts(counts);
}

struct Source {
  std::string name;
  std::string kind; // "group" or "model"
  TransitionMatrix matrix;
  std::optional<TransitionCounts> counts;
};

/// Groups present in the input take precedence over model names. Matching is
/// case-insensitive.
inline Source resolve_source(const Context &ctx, const std::string &name) {
  if (auto g = find_group(ctx, name)) {
    auto counts = pooled(ctx, group_members(ctx, *g));
    auto m = normalize_rows(counts, ctx.cfg.smoothing_alpha);
    return {*g, "group", std::move(m), std::move(counts)};
  }
  const auto want = io::detail::lower(name);
  for (const auto &spec : ctx.cfg.models())
    if (io::detail::lower(spec.name) == want)
      return {spec.name, "model", build_model(spec, ctx.space), std::nullopt};
  std::string known;
  if (ctx.data)
    for (const auto &g : ctx.data->group_labels)
      known += (known.empty() ? "" : ", ") + g;
  for (const auto &spec : ctx.cfg.models())
    known += (known.empty() ? "" : ", ") + spec.name;
  throw ValidationError("unknown group or model '" + name + "' (known: " + known + ")");
}

inline json structure_json(const TransitionMatrix &p) {
  json j{{"fully_defined", p.fully_defined()}};
  auto undefined = json::array();
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!p.row_defined(i))
      undefined.push_back(i + 1);
  j["undefined_rows"] = undefined;
  if (p.fully_defined()) {
    const auto classes = communicating_classes(p);
    auto cls = json::array();
    for (auto c : classes)
      cls.push_back(c);
    j["communicating_class"] = cls;
    j["irreducible"] = is_irreducible(p);
    auto periods = json::array();
    for (auto d : state_periods(p))
      periods.push_back(d);
    j["periods"] = periods;
    j["aperiodic"] = is_aperiodic(p);
  }
  return j;
}

inline json participant_json(const Context &ctx, const ResponseSequence &s) {
  const auto counts = count_transitions(s, ctx.space);
  const auto p = normalize_rows(counts, ctx.cfg.smoothing_alpha);
  return json{{"participant_id", s.participant_id},
              {"group", s.group ? json(*s.group) : json(nullptr)},
              {"length", s.length()},
              {"counts", io::to_json(counts)},
              {"matrix", io::to_json(p)},
              {"inertia", io::to_json(inertia(counts))}};
}

inline json pooled_json(const Context &ctx, const std::string &label,
                        const std::vector<ResponseSequence> &members) {
  const auto counts = pooled(ctx, members);
  const auto p = normalize_rows(counts, ctx.cfg.smoothing_alpha);
  const auto totals = counts.row_totals();
  return json{{"group", label},
              {"participants", members.size()},
              {"transitions", counts.total()},
              {"counts", io::to_json(counts)},
              {"matrix", io::to_json(p)},
              {"inertia", io::to_json(inertia(counts))},
              {"expected_inertia", io::number(expected_inertia(p, totals))},
              {"structure", structure_json(p)}};
}

// ---------------------------------------------------------------------------

inline void run_estimate(Context &ctx) {
  const auto &data = require_data(ctx);
  const auto all = sorted_by_id(data.sequences);
  if (all.empty())
    throw ValidationError("estimate: no sequences");
  auto participants = json::array();
  for (const auto &s : all) {
    validate_for_transitions(s, ctx.space);
    participants.push_back(participant_json(ctx, s));
  }
  auto groups = json::array();
  for (const auto &g : data.group_labels)
    groups.push_back(pooled_json(ctx, g, group_members(ctx, g)));
  ctx.report.results = json{{"state_labels", ctx.space.labels()},
                            {"participants", participants},
                            {"groups", groups},
                            {"pooled", pooled_json(ctx, "all", all)}};
}

inline void run_stationary(Context &ctx) {
  std::vector<std::string> names = ctx.opts.groups;
  names.insert(names.end(), ctx.opts.models.begin(), ctx.opts.models.end());
  if (names.empty()) {
    if (ctx.data)
      names.assign(ctx.data->group_labels.begin(), ctx.data->group_labels.end());
    if (names.empty())
      for (const auto &m : ctx.cfg.models())
        names.push_back(m.name);
  }
  auto targets = json::array();
  std::optional<StructuralError> failure;
  for (const auto &name : names) {
    const auto src = resolve_source(ctx, name);
    json t{{"name", src.name}, {"kind", src.kind}, {"matrix", io::to_json(src.matrix)},
           {"structure", structure_json(src.matrix)}};
    if (ctx.opts.powers > 0 && src.matrix.fully_defined()) {
      auto powers = json::array();
      int n = 1;
      for (const auto &pw : successive_powers(src.matrix, ctx.opts.powers))
        powers.push_back(json{{"power", n++}, {"matrix", io::to_json(pw)}});
      t["powers"] = powers;
    }
    try {
      const auto st = stationary(src.matrix, ctx.cfg.stationary_options());
      t["stationary"] = io::to_json(st);
      t["fixed_point_residual"] = io::number(fixed_point_residual(src.matrix, st.distribution));
      if (!st.converged)
        ctx.report.warnings.push_back("'" + src.name + "': powers did not settle within max_power " +
                                      std::to_string(ctx.cfg.max_power));
    } catch (const StructuralError &e) {
      t["stationary"] = nullptr;
      t["error"] = e.what();
      if (!failure)
        failure.emplace(std::string("'") + src.name + "': " + e.what());
    }
    targets.push_back(t);
  }
  ctx.report.results = json{{"targets", targets}};
  if (failure)
    throw *failure;
}

inline void run_compare(Context &ctx) {
  require_data(ctx);
  if (!ctx.opts.reference || !ctx.opts.focal)
    throw ValidationError("compare: --reference and --focal groups are required");
  const auto ref_group = find_group(ctx, *ctx.opts.reference);
  const auto foc_group = find_group(ctx, *ctx.opts.focal);
  if (!ref_group || !foc_group)
    throw ValidationError("compare: '" + (ref_group ? *ctx.opts.focal : *ctx.opts.reference) +
                          "' is not a group in the input");
  const auto ref = resolve_source(ctx, *ref_group);
  const auto foc = resolve_source(ctx, *foc_group);
  const auto ref_inertia = inertia(*ref.counts);
  const auto foc_inertia = inertia(*foc.counts);
  const auto inertia_test = inertia_association_test(ref_inertia, foc_inertia);
  const auto opts = ctx.cfg.stationary_options();
  const auto ref_st = stationary(ref.matrix, opts);
  const auto foc_st = stationary(foc.matrix, opts);
  // Scale both vectors to the focal group's transition count unless told otherwise.
  const double n = ctx.opts.n.value_or(static_cast<double>(foc.counts->total()));
  const auto gof = stationary_gof(ref_st.distribution, foc_st.distribution, n);
  auto over = json::array();
  for (auto c : gof.over_represented_cells)
    over.push_back(c + 1);
  ctx.report.results = json{
      {"reference", json{{"group", ref.name},
                         {"transitions", ref.counts->total()},
                         {"inertia", io::to_json(ref_inertia)},
                         {"stationary", io::to_json(ref_st)}}},
      {"focal", json{{"group", foc.name},
                     {"transitions", foc.counts->total()},
                     {"inertia", io::to_json(foc_inertia)},
                     {"stationary", io::to_json(foc_st)}}},
      {"inertia_association", io::to_json(inertia_test)},
      {"stationary_goodness_of_fit",
       json{{"n", io::number(n)}, {"outcome", io::to_json(gof)},
            {"over_represented_states", over}}}};
  for (const auto &w : inertia_test.warnings)
    ctx.report.warnings.push_back("inertia test: " + w);
  for (const auto &w : gof.warnings)
    ctx.report.warnings.push_back("stationary goodness of fit: " + w);
}

inline LogRatioMatrix binary_log_ratio(const Context &ctx, const Source &num,
                                       const Source &den) {
  return log_ratio(num.matrix, den.matrix, num.name, den.name, ctx.cfg.epsilon_floor);
}

inline std::pair<Source, Source> binary_sources(Context &ctx) {
  if (!ctx.opts.numerator || !ctx.opts.denominator)
    throw ValidationError(ctx.report.command + ": --numerator and --denominator are required");
  return {resolve_source(ctx, *ctx.opts.numerator), resolve_source(ctx, *ctx.opts.denominator)};
}

inline void run_score(Context &ctx) {
  auto [num, den] = binary_sources(ctx);
  const auto lr = binary_log_ratio(ctx, num, den);
  const auto seqs = analysis_sequences(ctx);
  auto scores = json::array();
  for (const auto &s : seqs) {
    const auto sc = score_sequence(s, lr);
    auto j = io::to_json(sc);
    j["group"] = s.group ? json(*s.group) : json(nullptr);
    j["classified_as"] = classify_binary(sc, num.name, den.name, ctx.cfg.cutoff);
    scores.push_back(j);
  }
  ctx.report.results = json{{"log_ratio", io::to_json(lr)},
                            {"numerator_kind", num.kind},
                            {"denominator_kind", den.kind},
                            {"cutoff", io::number(ctx.cfg.cutoff)},
                            {"scores", scores}};
}

inline json class_counts_json(const std::vector<std::string> &classes,
                              const std::vector<std::int64_t> &counts) {
  json j = json::object();
  for (std::size_t i = 0; i < classes.size(); ++i)
    j[classes[i]] = counts[i];
  return j;
}

inline void run_classify(Context &ctx) {
  const auto seqs = analysis_sequences(ctx);
  std::vector<std::string> classes;
  std::vector<std::int64_t> counts;
  const auto tally = [&](const std::string &c) {
    const auto it = std::find(classes.begin(), classes.end(), c);
    ++counts[static_cast<std::size_t>(it - classes.begin())];
  };
  auto verdicts = json::array();
  json results;

  if (!ctx.opts.models.empty()) {
    if (ctx.opts.numerator || ctx.opts.denominator)
      throw ValidationError("classify: use either --models/--reference or --numerator/--denominator");
    if (!ctx.opts.reference)
      throw ValidationError("classify: --models needs --reference");
    std::vector<NamedModel> candidates;
    for (const auto &name : ctx.opts.models) {
      auto src = resolve_source(ctx, name);
      candidates.push_back({src.name, std::move(src.matrix)});
      classes.push_back(candidates.back().name);
    }
    auto ref_src = resolve_source(ctx, *ctx.opts.reference);
    const NamedModel reference{ref_src.name, std::move(ref_src.matrix)};
    classes.push_back(reference.name);
    counts.assign(classes.size(), 0);
    for (const auto &s : seqs) {
      const auto v = classify_multimodel(s, candidates, reference, ctx.cfg.epsilon_floor);
      tally(v.assigned_model);
      auto j = io::to_json(v);
      j = json{{"participant_id", s.participant_id},
               {"group", s.group ? json(*s.group) : json(nullptr)},
               {"scores", j["scores"]},
               {"assigned_model", v.assigned_model},
               {"tie", v.tie}};
      verdicts.push_back(j);
    }
    results = json{{"mode", "multi_model"},
                   {"candidates", ctx.opts.models},
                   {"reference", reference.name}};
  } else {
    auto [num, den] = binary_sources(ctx);
    const auto lr = binary_log_ratio(ctx, num, den);
    classes = {num.name, den.name};
    counts.assign(2, 0);
    for (const auto &s : seqs) {
      const auto sc = score_sequence(s, lr);
      const auto &label = classify_binary(sc, num.name, den.name, ctx.cfg.cutoff);
      tally(label);
      verdicts.push_back(json{{"participant_id", s.participant_id},
                              {"group", s.group ? json(*s.group) : json(nullptr)},
                              {"score", io::number(sc.score)},
                              {"assigned_model", label}});
    }
    results = json{{"mode", "binary"},
                   {"numerator", num.name},
                   {"denominator", den.name},
                   {"cutoff", io::number(ctx.cfg.cutoff)},
                   {"log_ratio", io::to_json(lr)}};
  }
  results["verdicts"] = verdicts;
  results["class_counts"] = class_counts_json(classes, counts);
  results["equiprobability"] = io::to_json(equiprobability_test(counts));
  ctx.report.results = results;
}

inline void run_diagnose(Context &ctx) {
  const auto &data = require_data(ctx);
  if (!ctx.opts.positive)
    throw ValidationError("diagnose: --positive group is required");
  const auto pos = find_group(ctx, *ctx.opts.positive);
  if (!pos)
    throw ValidationError("diagnose: '" + *ctx.opts.positive + "' is not a group in the input");
  if (data.group_labels.size() != 2)
    throw ValidationError("diagnose: the input must contain exactly two groups, found " +
                          std::to_string(data.group_labels.size()));
  const std::string neg = *data.group_labels.begin() == *pos ? *data.group_labels.rbegin()
                                                              : *data.group_labels.begin();
  auto num = resolve_source(ctx, ctx.opts.numerator.value_or(*pos));
  auto den = resolve_source(ctx, ctx.opts.denominator.value_or(neg));
  const auto lr = binary_log_ratio(ctx, num, den);

  const auto seqs = sorted_by_id(data.sequences);
  std::vector<std::string> truth, predicted;
  std::vector<double> lr_scores, sums;
  for (const auto &s : seqs) {
    if (!s.group)
      throw ValidationError("diagnose: participant '" + s.participant_id + "' has no group");
    validate_for_transitions(s, ctx.space);
    truth.push_back(*s.group);
    const auto sc = score_sequence(s, lr);
    lr_scores.push_back(sc.score);
    // Scores at or above the cutoff favour the numerator, which stands for
    // the positive group.
    predicted.push_back(classify_binary(sc, *pos, neg, ctx.cfg.cutoff));
    sums.push_back(total_score(s));
  }
  const auto mask = positive_mask(truth, *pos);
  const auto table = confusion(truth, predicted, *pos);
  const auto lr_roc = roc_curve(lr_scores, mask);
  const auto sum_roc = roc_curve(sums, mask);
  const auto sum_best = best_cutoff(sums, mask);
  const auto sum_table = confusion_at_cutoff(sums, mask, sum_best.cutoff, *pos);

  ctx.report.results = json{
      {"positive", *pos},
      {"negative", neg},
      {"log_ratio_classifier",
       json{{"log_ratio", io::to_json(lr)},
            {"confusion", io::to_json(table)},
            {"metrics", io::to_json(metrics(table, ctx.cfg.cutoff))},
            {"roc", io::to_json(lr_roc)}}},
      {"total_score_classifier",
       json{{"cutoff_rule", "max sensitivity + specificity - 1"},
            {"confusion", io::to_json(sum_table)},
            {"metrics", io::to_json(sum_best)},
            {"roc", io::to_json(sum_roc)}}}};
  if (ctx.opts.roc_csv)
    io::write_text_file(*ctx.opts.roc_csv, roc_to_csv(lr_roc));
  if (ctx.opts.total_roc_csv)
    io::write_text_file(*ctx.opts.total_roc_csv, roc_to_csv(sum_roc));
  if (ctx.opts.svg)
    io::write_text_file(*ctx.opts.svg,
                        io::roc_svg({{"log-ratio score", lr_roc}, {"total score", sum_roc}},
                                    *pos + " vs " + neg));
}

inline void run_simulate(Context &ctx) {
  const std::size_t chosen = ctx.opts.groups.size() + ctx.opts.models.size();
  if (chosen != 1)
    throw ValidationError("simulate: give exactly one --model or --group");
  const auto name = ctx.opts.groups.empty() ? ctx.opts.models.front() : ctx.opts.groups.front();
  const auto src = resolve_source(ctx, name);
  SimulationSpec spec;
  spec.matrix = src.matrix;
  spec.length = ctx.opts.length;
  spec.count = ctx.opts.count;
  spec.seed = ctx.opts.seed;
  spec.id_prefix = ctx.opts.id_prefix;
  spec.group = ctx.opts.label.value_or(src.name);
  const auto init = resolve_initial(spec);
  const auto cohort = generate_cohort(spec, ctx.opts.threads);
  const auto csv = io::cohort_to_csv(cohort, ctx.space);

  json results{{"source", json{{"name", src.name}, {"kind", src.kind},
                               {"matrix", io::to_json(src.matrix)}}},
               {"generator", "mt19937_64 seeded with splitmix64(seed + index)"},
               {"seed", spec.seed},
               {"length", spec.length},
               {"count", spec.count},
               {"initial_distribution",
                json{{"source", init.source}, {"probabilities", io::numbers(init.probabilities)}}},
               {"cohort_fnv1a64", io::hex64(io::fnv1a64(csv))}};
  if (ctx.opts.output) {
    io::write_text_file(*ctx.opts.output, csv);
    results["output"] = *ctx.opts.output;
  } else {
    auto seqs = json::array();
    for (const auto &s : cohort)
      seqs.push_back(json{{"participant_id", s.participant_id},
                          {"group", *s.group},
                          {"responses", io::format_responses(s, ctx.space.size())}});
    results["sequences"] = seqs;
  }
  ctx.report.results = results;
}

} // namespace detail

inline const std::vector<std::string> &subcommands() {
  static const std::vector<std::string> names{"estimate", "stationary", "compare", "score",
                                              "classify", "diagnose",   "simulate"};
  return names;
}

/// Runs one subcommand. Throws respchain::Error on failure.
inline io::Report run_subcommand(const Options &opts, const io::Config &cfg) {
  auto ctx = detail::make_context(opts, cfg, opts.command);
  const auto &c = opts.command;
  if (c == "estimate")
    detail::run_estimate(ctx);
  else if (c == "stationary")
    detail::run_stationary(ctx);
  else if (c == "compare")
    detail::run_compare(ctx);
  else if (c == "score")
    detail::run_score(ctx);
  else if (c == "classify")
    detail::run_classify(ctx);
  else if (c == "diagnose")
    detail::run_diagnose(ctx);
  else if (c == "simulate")
    detail::run_simulate(ctx);
  else
    throw ValidationError("unknown command '" + c + "'");
  return std::move(ctx.report);
}

inline std::string error_json(ErrorKind kind, const std::string &message) {
  return json{{"error", json{{"kind", to_string(kind)},
                             {"exit_code", static_cast<int>(kind)},
                             {"message", message}}}}
             .dump() +
         "\n";
}

struct Outcome {
  int exit_code = 0;
  std::string out;
  std::string err;
};

namespace detail {

inline void add_common(CLI::App &app, Options &o) {
  app.add_option("-i,--input", o.input, "Cohort CSV (participant_id,group,responses)");
  app.add_option("-c,--config", o.config_path,
                 std::string("Config file (default: $") + io::kConfigEnvVar + ")");
  app.add_option("--report", o.report_path, "Write the JSON report here instead of stdout");
  app.add_option("--states", o.states, "Number of response states");
  app.add_option("--state-labels", o.state_labels, "Semicolon-separated state labels");
  app.add_option("--tolerance", o.tolerance, "Convergence tolerance for matrix powers");
  app.add_option("--max-power", o.max_power, "Largest matrix power to try");
  app.add_option("--epsilon-floor", o.epsilon_floor, "Floor for zero cells in ratios");
  app.add_option("--alpha", o.smoothing_alpha, "Additive smoothing applied to counts");
  app.add_option("--cutoff", o.cutoff, "Score cutoff for binary classification");
  app.add_option("--mode", o.mode, "strict or lenient input validation")
      ->check(CLI::IsMember({"strict", "lenient"}));
}

inline void add_sequences(CLI::App &app, Options &o) {
  app.add_option("--sequence", o.sequences, "Inline response string, e.g. 3243232443244333");
}

} // namespace detail

/// Parses arguments, runs, and renders the report or a JSON error.
inline Outcome run(int argc, const char *const *argv) {
  Options o;
  CLI::App app{"Markov-chain analysis of questionnaire response sequences", "respchain"};
  app.set_version_flag("--version", std::string(io::kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();
  detail::add_common(app, o);

  auto *estimate = app.add_subcommand("estimate", "Per-participant and pooled transition matrices");
  (void)estimate;

  auto *stationary = app.add_subcommand("stationary", "Matrix powers, structure and stationary distributions");
  stationary->add_option("--group", o.groups, "Group in the input (repeatable)");
  stationary->add_option("--model", o.models, "Theoretical model (repeatable)");
  stationary->add_option("--powers", o.powers, "Also report P^1..P^n");

  auto *compare = app.add_subcommand("compare", "Inertia association and stationary goodness of fit");
  compare->add_option("--reference", o.reference, "Reference group (expected)")->required();
  compare->add_option("--focal", o.focal, "Focal group (observed)")->required();
  compare->add_option("--n", o.n, "Transitions to scale to (default: focal group's count)");

  auto *score = app.add_subcommand("score", "Log-ratio scores between two groups or models");
  score->add_option("--numerator", o.numerator, "Group or model in the numerator")->required();
  score->add_option("--denominator", o.denominator, "Group or model in the denominator")->required();
  detail::add_sequences(*score, o);

  auto *classify = app.add_subcommand("classify", "Binary or multi-model classification");
  classify->add_option("--numerator", o.numerator, "Group or model in the numerator");
  classify->add_option("--denominator", o.denominator, "Group or model in the denominator");
  classify->add_option("--models", o.models, "Candidate models, comma-separated")->delimiter(',');
  classify->add_option("--reference", o.reference, "Reference model");
  detail::add_sequences(*classify, o);

  auto *diagnose = app.add_subcommand("diagnose", "Confusion table, metrics and ROC");
  diagnose->add_option("--positive", o.positive, "Group treated as positive")->required();
  diagnose->add_option("--numerator", o.numerator, "Numerator group or model (default: positive)");
  diagnose->add_option("--denominator", o.denominator, "Denominator (default: the other group)");
  diagnose->add_option("--roc-csv", o.roc_csv, "Write log-ratio ROC points as CSV");
  diagnose->add_option("--total-roc-csv", o.total_roc_csv, "Write total-score ROC points as CSV");
  diagnose->add_option("--svg", o.svg, "Write both ROC curves as SVG");

  auto *simulate = app.add_subcommand("simulate", "Generate a synthetic cohort");
  simulate->add_option("--model", o.models, "Theoretical model to draw from");
  simulate->add_option("--group", o.groups, "Group in the input whose pooled matrix to draw from");
  simulate->add_option("--length", o.length, "Responses per sequence")->check(CLI::Range(2, 1 << 30));
  simulate->add_option("--count", o.count, "Number of sequences")->check(CLI::Range(1, 1 << 30));
  simulate->add_option("--seed", o.seed, "Master seed");
  simulate->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1, 1024));
  simulate->add_option("--label", o.label, "Group label written to the output");
  simulate->add_option("--id-prefix", o.id_prefix, "Participant id prefix");
  simulate->add_option("-o,--output", o.output, "Write the cohort CSV here");

  Outcome result;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    std::ostringstream out, err;
    result.exit_code = app.exit(e, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
  } catch (const CLI::CallForVersion &e) {
    std::ostringstream out, err;
    result.exit_code = app.exit(e, out, err);
    result.out = out.str();
    return result;
  } catch (const CLI::ParseError &e) {
    result.exit_code = static_cast<int>(ErrorKind::validation);
    result.err = error_json(ErrorKind::validation, e.what());
    return result;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    const auto cfg = effective_config(o);
    const auto report = run_subcommand(o, cfg);
    const auto text = report.document(io::utc_timestamp()).dump(2) + "\n";
    if (o.report_path)
      io::write_text_file(*o.report_path, text);
    else
      result.out = text;
    result.exit_code = 0;
  } catch (const Error &e) {
    result.exit_code = static_cast<int>(e.kind());
    result.err = error_json(e.kind(), e.what());
  } catch (const std::exception &e) {
    result.exit_code = static_cast<int>(ErrorKind::validation);
    result.err = error_json(ErrorKind::validation, e.what());
  }
  return result;
}

} // namespace respchain::cli
