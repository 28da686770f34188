#pragma once

// Classifier evaluation. Orientation is fixed: score >= cutoff predicts the
// positive class.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "respchain/error.hpp"
#include "respchain/state_space.hpp"

namespace respchain {

struct ConfusionTable {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::string positive_label;

  std::int64_t positives() const noexcept { return tp + fn; }
  std::int64_t negatives() const noexcept { return tn + fp; }
};

struct DiagnosticMetrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  /// +inf when specificity is 1.
  double lr_positive = 0.0;
  /// +inf when specificity is 0.
  double lr_negative = 0.0;
  double cutoff = 0.0;
};

struct RocPoint {
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
  /// +inf for the (0,0) sentinel.
  double cutoff = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

inline ConfusionTable confusion(std::span<const std::string> labels,
                                std::span<const std::string> predictions,
                                const std::string &positive_label) {
  if (labels.size() != predictions.size())
    throw ValidationError("confusion: " + std::to_string(labels.size()) +
                          " labels vs " + std::to_string(predictions.size()) +
                          " predictions");
  std::set<std::string> classes(labels.begin(), labels.end());
  classes.insert(predictions.begin(), predictions.end());
  classes.insert(positive_label);
  if (classes.size() > 2)
    throw ValidationError("confusion: more than two classes present");
  ConfusionTable t;
  t.positive_label = positive_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == positive_label;
    const bool predicted = predictions[i] == positive_label;
    if (actual)
      (predicted ? t.tp : t.fn)++;
    else
      (predicted ? t.fp : t.tn)++;
  }
  return t;
}

inline ConfusionTable confusion_at_cutoff(std::span<const double> scores,
                                          const std::vector<bool> &is_positive,
                                          double cutoff,
                                          std::string positive_label = "positive") {
  if (scores.size() != is_positive.size())
    throw ValidationError("confusion_at_cutoff: length mismatch");
  ConfusionTable t;
  t.positive_label = std::move(positive_label);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= cutoff;
    if (is_positive[i])
      (predicted ? t.tp : t.fn)++;
    else
      (predicted ? t.fp : t.tn)++;
  }
  return t;
}

inline DiagnosticMetrics metrics(const ConfusionTable &t, double cutoff = 0.0) {
  if (t.tp < 0 || t.fn < 0 || t.tn < 0 || t.fp < 0)
    throw ValidationError("metrics: negative cell count");
  if (t.positives() == 0 || t.negatives() == 0)
    throw ValidationError("metrics: need at least one positive and one "
                          "negative case");
  constexpr double inf = std::numeric_limits<double>::infinity();
  DiagnosticMetrics m;
  m.cutoff = cutoff;
  m.sensitivity = static_cast<double>(t.tp) / static_cast<double>(t.positives());
  m.specificity = static_cast<double>(t.tn) / static_cast<double>(t.negatives());
  m.lr_positive =
      m.specificity == 1.0 ? inf : m.sensitivity / (1.0 - m.specificity);
  m.lr_negative =
      m.specificity == 0.0 ? inf : (1.0 - m.sensitivity) / m.specificity;
  return m;
}

/// Empirical ROC: one point per distinct score (ties cross together) plus the
/// (0,0) sentinel; AUC by the trapezoid rule.
inline RocCurve roc_curve(std::span<const double> scores,
                          const std::vector<bool> &is_positive) {
  if (scores.size() != is_positive.size())
    throw ValidationError("roc_curve: length mismatch");
  const auto pos = std::count(is_positive.begin(), is_positive.end(), true);
  const auto neg = static_cast<std::int64_t>(is_positive.size()) - pos;
  if (pos == 0 || neg == 0)
    throw ValidationError("roc_curve: need both positive and negative cases");
  for (double s : scores)
    if (std::isnan(s))
      throw ValidationError("roc_curve: NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::int64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double cut = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == cut; ++k)
      (is_positive[order[k]] ? tp : fp)++;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos),
                            cut});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto &a = curve.points[i - 1];
    const auto &b = curve.points[i];
    curve.auc += (b.false_positive_rate - a.false_positive_rate) *
                 (a.true_positive_rate + b.true_positive_rate) / 2.0;
  }
  return curve;
}

inline std::vector<bool> positive_mask(std::span<const std::string> labels,
                                       const std::string &positive_label) {
  std::vector<bool> out;
  out.reserve(labels.size());
  for (const auto &l : labels)
    out.push_back(l == positive_label);
  return out;
}

/// Cutoff maximizing Sn + Sp - 1 over the distinct scores; ties go to the
/// larger cutoff.
inline DiagnosticMetrics best_cutoff(std::span<const double> scores,
                                     const std::vector<bool> &is_positive) {
  const RocCurve curve = roc_curve(scores, is_positive);
  double best_j = -std::numeric_limits<double>::infinity();
  double cut = 0.0;
  for (const auto &p : curve.points) {
    if (std::isinf(p.cutoff))
      continue;
    const double j = p.true_positive_rate - p.false_positive_rate;
    if (j > best_j + 1e-12) {
      best_j = j;
      cut = p.cutoff;
    }
  }
  return metrics(confusion_at_cutoff(scores, is_positive, cut), cut);
}

/// Sum of the responses, the conventional scale score.
inline double total_score(const ResponseSequence &seq) {
  return std::accumulate(seq.states.begin(), seq.states.end(), 0.0);
}

/// `fpr,tpr,cutoff` CSV; the sentinel cutoff is written as `inf`.
inline std::string roc_to_csv(const RocCurve &curve) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "fpr,tpr,cutoff\n";
  for (const auto &p : curve.points) {
    os << p.false_positive_rate << ',' << p.true_positive_rate << ',';
    if (std::isinf(p.cutoff))
      os << (p.cutoff > 0 ? "inf" : "-inf");
    else
      os << p.cutoff;
    os << '\n';
  }
  return os.str();
}

} // namespace respchain
