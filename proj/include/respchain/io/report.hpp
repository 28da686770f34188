#pragma once

// Analysis reports as JSON. The document splits into a `header`, which holds
// anything that varies between runs (the timestamp), and a `payload` that is a
// pure function of the inputs and configuration. Non-finite numbers are
// written as the strings "inf", "-inf" and "nan" since JSON has no literal
// for them.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "respchain/chain_core.hpp"
#include "respchain/diagnostics.hpp"
#include "respchain/likelihood.hpp"
#include "respchain/stat_tests.hpp"

#ifndef RESPCHAIN_VERSION
#define RESPCHAIN_VERSION "0.0.0"
#endif

namespace respchain::io {

using json = nlohmann::ordered_json;

inline constexpr const char *kReportSchema = "respchain.report";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char *kToolVersion = RESPCHAIN_VERSION;

/// 64-bit FNV-1a, used to fingerprint inputs in report provenance.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4)
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

inline json number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return v;
}

inline json numbers(std::span<const double> v) {
  auto out = json::array();
  for (double x : v)
    out.push_back(number(x));
  return out;
}

inline json to_json(const RealMatrix &m) {
  auto rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i)
    rows.push_back(numbers(m.row(i)));
  return rows;
}

/// Undefined rows are written as null.
inline json to_json(const TransitionMatrix &p) {
  auto rows = json::array();
  for (std::size_t i = 0; i < p.size(); ++i)
    rows.push_back(p.row_defined(i) ? numbers(p.probs().row(i)) : json(nullptr));
  return rows;
}

inline json to_json(const TransitionCounts &c) {
  auto rows = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto row = json::array();
    for (std::size_t j = 0; j < c.size(); ++j)
      row.push_back(c(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const InertiaSummary &s) {
  return json{{"on_diagonal", s.on_diagonal},
              {"off_diagonal", s.off_diagonal},
              {"proportion", number(s.proportion)}};
}

inline json to_json(const StationaryResult &r) {
  return json{{"distribution", numbers(r.distribution)},
              {"power_at_convergence", r.power_at_convergence},
              {"converged", r.converged},
              {"tolerance_used", number(r.tolerance_used)},
              {"final_difference", number(r.final_difference)}};
}

inline json to_json(const ChiSquareOutcome &o) {
  return json{{"statistic", number(o.statistic)},
              {"df", o.df},
              {"p_value", number(o.p_value)},
              {"std_residuals", numbers(o.std_residuals)},
              {"flagged_cells", o.flagged_cells},
              {"over_represented_cells", o.over_represented_cells},
              {"warnings", o.warnings}};
}

inline json to_json(const EpsilonPolicy &e) {
  auto subs = json::array();
  for (const auto &s : e.substitutions)
    subs.push_back(json{{"from", s.from + 1},
                        {"to", s.to + 1},
                        {"matrix", s.in_numerator ? "numerator" : "denominator"},
                        {"original", number(s.original)}});
  return json{{"floor", number(e.floor)}, {"substitutions", subs}};
}

inline json to_json(const LogRatioMatrix &lr) {
  return json{{"numerator", lr.numerator_name},
              {"denominator", lr.denominator_name},
              {"log2_ratio", to_json(lr.values)},
              {"epsilon_policy", to_json(lr.epsilon_policy)}};
}

inline json to_json(const SequenceScore &s) {
  auto terms = json::array();
  for (const auto &t : s.per_transition_terms)
    terms.push_back(json{{"from", t.from},
                         {"to", t.to},
                         {"count", t.count},
                         {"contribution", number(t.contribution)}});
  return json{{"participant_id", s.participant_id},
              {"score", number(s.score)},
              {"terms", terms}};
}

inline json to_json(const MultiModelVerdict &v) {
  json scores = json::object();
  for (const auto &name : v.order)
    scores[name] = number(v.scores.at(name));
  return json{{"scores", scores}, {"assigned_model", v.assigned_model}, {"tie", v.tie}};
}

inline json to_json(const ConfusionTable &t) {
  return json{{"positive_label", t.positive_label},
              {"tp", t.tp},
              {"fn", t.fn},
              {"tn", t.tn},
              {"fp", t.fp}};
}

inline json to_json(const DiagnosticMetrics &m) {
  return json{{"cutoff", number(m.cutoff)},
              {"sensitivity", number(m.sensitivity)},
              {"specificity", number(m.specificity)},
              {"lr_positive", number(m.lr_positive)},
              {"lr_negative", number(m.lr_negative)}};
}

inline json to_json(const RocCurve &c) {
  auto pts = json::array();
  for (const auto &p : c.points)
    pts.push_back(json::array({number(p.false_positive_rate),
                               number(p.true_positive_rate), number(p.cutoff)}));
  return json{{"auc", number(c.auc)}, {"points", pts}};
}

struct Report {
  std::string command;
  json provenance = json::object();
  json results = json::object();
  std::vector<std::string> warnings;

  json payload() const {
    return json{{"command", command},
                {"provenance", provenance},
                {"warnings", warnings},
                {"results", results}};
  }

  json document(std::string_view generated_at) const {
    return json{{"schema", kReportSchema},
                {"schema_version", kReportSchemaVersion},
                {"header", json{{"generated_at", generated_at}}},
                {"payload", payload()}};
  }
};

/// UTC timestamp such as 2026-01-31T12:00:00Z.
inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace respchain::io
