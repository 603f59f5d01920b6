#pragma once

#include <string>

#include "fairaudit/rate_table.hpp"

namespace fairaudit {

enum class Notion {
  StatisticalParity,
  AccuracyEquality,
  Calibration,
  EqualOpportunity,
  PredictiveEquality,
  MisclassificationRate,
};

inline constexpr int kNotionCount = 6;

inline const char* notion_code(Notion n) {
  switch (n) {
    case Notion::StatisticalParity: return "SP";
    case Notion::AccuracyEquality: return "AE";
    case Notion::Calibration: return "CAL";
    case Notion::EqualOpportunity: return "EO";
    case Notion::PredictiveEquality: return "PE";
    case Notion::MisclassificationRate: return "OMR";
  }
  return "?";
}

inline Notion notion_from_code(const std::string& code) {
  for (int i = 0; i < kNotionCount; ++i) {
    const Notion n = static_cast<Notion>(i);
    if (code == notion_code(n)) return n;
  }
  throw DomainError("unknown notion code '" + code + "'");
}

/// True for notions computable exactly from disagreement + parity rates.
inline bool is_definite(Notion n) {
  return n == Notion::StatisticalParity || n == Notion::AccuracyEquality ||
         n == Notion::Calibration;
}

/// A group-fairness score: the maximum of R_{m,k} - R_{m',k} over labels and
/// ordered group pairs, with the location of the maximum and the number of
/// undefined cells that were skipped while scanning.
struct NotionValue {
  Notion kind = Notion::StatisticalParity;
  double value = 0.0;
  int argmax_label = -1;  // -1 for label-free notions (accuracy equality)
  int argmax_group_hi = -1;
  int argmax_group_lo = -1;
  long long excluded_cells = 0;
};

namespace detail {

// Scans max over ordered pairs of per-(group,label) rates. Entries may be
// missing; labels with fewer than two defined groups do not participate.
class PairMaxScan {
 public:
  void feed(int label, int group, double rate) {
    if (!started_ || label != current_label_) flush(label);
    for (const auto& [g, r] : row_) {
      consider(rate - r, current_label_, group, g);
      consider(r - rate, current_label_, g, group);
    }
    row_.emplace_back(group, rate);
  }

  bool any() const noexcept { return found_; }
  double value() const noexcept { return best_; }
  int label() const noexcept { return best_label_; }
  int group_hi() const noexcept { return best_hi_; }
  int group_lo() const noexcept { return best_lo_; }

 private:
  void flush(int label) {
    row_.clear();
    current_label_ = label;
    started_ = true;
  }
  void consider(double diff, int label, int hi, int lo) {
    if (!found_ || diff > best_) {
      found_ = true;
      best_ = diff;
      best_label_ = label;
      best_hi_ = hi;
      best_lo_ = lo;
    }
  }

  std::vector<std::pair<int, double>> row_;
  int current_label_ = -1;
  bool started_ = false;
  bool found_ = false;
  double best_ = 0.0;
  int best_label_ = -1;
  int best_hi_ = -1;
  int best_lo_ = -1;
};

}  // namespace detail

/// Max over labels and ordered group pairs of SP_{m,k} - SP_{m',k}.
/// Depends only on the system's outputs, never on disagreement bits.
inline NotionValue statistical_parity(const RateTable& table) {
  NotionValue out;
  out.kind = Notion::StatisticalParity;
  detail::PairMaxScan scan;
  for (int k = 0; k < table.label_count(); ++k)
    for (int m = 0; m < table.group_count(); ++m) {
      const auto v = table.sp(m, k);
      if (!v) {
        ++out.excluded_cells;
        continue;
      }
      scan.feed(k, m, *v);
    }
  if (table.defined_group_count() < 2 || !scan.any())
    throw DomainError("statistical_parity: need at least two non-empty groups");
  out.value = scan.value();
  out.argmax_label = scan.label();
  out.argmax_group_hi = scan.group_hi();
  out.argmax_group_lo = scan.group_lo();
  return out;
}

/// Per-group accuracy AE_m = 1 - sum_k DR_{m,k} * SP_{m,k} over defined cells,
/// then the max over ordered group pairs. Label-free.
inline NotionValue accuracy_equality(const RateTable& table) {
  NotionValue out;
  out.kind = Notion::AccuracyEquality;
  detail::PairMaxScan scan;
  for (int m = 0; m < table.group_count(); ++m) {
    if (!table.has_records(m) || !table.sp_defined(m)) {
      ++out.excluded_cells;
      continue;
    }
    double mismatch = 0.0;
    for (int k = 0; k < table.label_count(); ++k) {
      if (!table.cell_defined(m, k)) {
        ++out.excluded_cells;
        continue;
      }
      mismatch += *table.dr(m, k) * *table.sp(m, k);
    }
    scan.feed(0, m, 1.0 - mismatch);
  }
  if (!scan.any())
    throw DomainError("accuracy_equality: need at least two non-empty groups");
  out.value = scan.value();
  out.argmax_group_hi = scan.group_hi();
  out.argmax_group_lo = scan.group_lo();
  return out;
}

/// Max over labels and ordered pairs of DR_{m,k} - DR_{m',k}; identical to the
/// max positive-predictive-value gap because the cell rates are complements.
inline NotionValue calibration(const RateTable& table) {
  NotionValue out;
  out.kind = Notion::Calibration;
  detail::PairMaxScan scan;
  for (int k = 0; k < table.label_count(); ++k)
    for (int m = 0; m < table.group_count(); ++m) {
      const auto v = table.dr(m, k);
      if (!v) {
        ++out.excluded_cells;
        continue;
      }
      scan.feed(k, m, *v);
    }
  if (!scan.any())
    throw DomainError("calibration: no label has disagreement rates in two groups");
  out.value = scan.value();
  out.argmax_label = scan.label();
  out.argmax_group_hi = scan.group_hi();
  out.argmax_group_lo = scan.group_lo();
  return out;
}

}  // namespace fairaudit
