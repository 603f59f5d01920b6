#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairaudit/domain.hpp"

namespace fairaudit {

enum class RateKind { StatisticalParity, DisagreementCell, DisagreementGroup };

/// Empirical statistical-parity and disagreement rates for one population.
///
/// The table stores exact integer tallies and divides only at read time, so
/// count-level identities (per-group simplex, disagreement decomposition)
/// hold at the rational level. Cells with no records are reported as
/// undefined rather than defaulted; optional additive smoothing `alpha`
/// makes every cell of a non-empty group defined.
///
/// A table may carry replacement statistical-parity counts from a pooled
/// population (same label/group shape); disagreement rates always come from
/// the table's own records.
class RateTable {
 public:
  RateTable(int group_count, int label_count, double smoothing_alpha = 0.0)
      : groups_(group_count),
        labels_(label_count),
        alpha_(smoothing_alpha),
        counts_(static_cast<std::size_t>(group_count) * label_count, 0),
        disagree_(static_cast<std::size_t>(group_count) * label_count, 0),
        totals_(group_count, 0) {
    if (groups_ < 2) throw DomainError("RateTable: need at least 2 groups");
    if (labels_ < 2) throw DomainError("RateTable: need at least 2 labels");
    if (alpha_ < 0.0) throw DomainError("RateTable: smoothing alpha must be >= 0");
  }

  int group_count() const noexcept { return groups_; }
  int label_count() const noexcept { return labels_; }
  double smoothing_alpha() const noexcept { return alpha_; }
  bool has_pooled_sp() const noexcept { return !sp_counts_.empty(); }

  void add(int group, int system_label, int disagreement) {
    require_indices(group, system_label);
    if (disagreement != 0 && disagreement != 1)
      throw DomainError("RateTable: disagreement bit must be 0 or 1");
    counts_[idx(group, system_label)] += 1;
    disagree_[idx(group, system_label)] += disagreement;
    totals_[group] += 1;
  }

  std::int64_t cell_count(int m, int k) const {
    require_indices(m, k);
    return counts_[idx(m, k)];
  }
  std::int64_t disagree_count(int m, int k) const {
    require_indices(m, k);
    return disagree_[idx(m, k)];
  }
  std::int64_t group_total(int m) const {
    require_group(m);
    return totals_[m];
  }

  /// True when the table's own records cover group m.
  bool has_records(int m) const {
    require_group(m);
    return totals_[m] > 0;
  }

  /// True when statistical parity is available for group m (own or pooled counts).
  bool sp_defined(int m) const {
    require_group(m);
    return has_pooled_sp() ? sp_totals_[m] > 0 : totals_[m] > 0;
  }

  /// True when the disagreement rate at (m, k) is available.
  bool cell_defined(int m, int k) const {
    require_indices(m, k);
    if (counts_[idx(m, k)] > 0) return true;
    return alpha_ > 0.0 && totals_[m] > 0;
  }

  int defined_group_count() const {
    int n = 0;
    for (int m = 0; m < groups_; ++m)
      if (sp_defined(m)) ++n;
    return n;
  }

  /// SP_{m,k}: probability that group m receives system label k.
  std::optional<double> sp(int m, int k) const {
    require_indices(m, k);
    if (!sp_defined(m)) return std::nullopt;
    const std::int64_t num = has_pooled_sp() ? sp_counts_[idx(m, k)] : counts_[idx(m, k)];
    const std::int64_t den = has_pooled_sp() ? sp_totals_[m] : totals_[m];
    return (static_cast<double>(num) + alpha_) /
           (static_cast<double>(den) + alpha_ * labels_);
  }

  /// DR_{m,k}: probability of disagreement given system label k in group m.
  std::optional<double> dr(int m, int k) const {
    if (!cell_defined(m, k)) return std::nullopt;
    return (static_cast<double>(disagree_[idx(m, k)]) + alpha_) /
           (static_cast<double>(counts_[idx(m, k)]) + 2.0 * alpha_);
  }

  /// DR_m: group disagreement rate, composed as sum_k DR_{m,k} * SP_{m,k}
  /// over defined cells so the decomposition identity holds by construction.
  std::optional<double> dr_group(int m) const {
    require_group(m);
    if (!has_records(m) || !sp_defined(m)) return std::nullopt;
    double acc = 0.0;
    for (int k = 0; k < labels_; ++k) {
      if (!cell_defined(m, k)) continue;
      acc += *dr(m, k) * *sp(m, k);
    }
    return acc;
  }

  long long undefined_cell_count() const {
    long long n = 0;
    for (int m = 0; m < groups_; ++m)
      for (int k = 0; k < labels_; ++k)
        if (!cell_defined(m, k)) ++n;
    return n;
  }

  /// Same disagreement counts, statistical parity replaced by `pool`'s counts.
  RateTable with_pooled_sp(const RateTable& pool) const {
    if (pool.group_count() != groups_ || pool.label_count() != labels_)
      throw DomainError("with_pooled_sp: pooled table shape mismatch");
    RateTable out(*this);
    out.sp_counts_ = pool.has_pooled_sp() ? pool.sp_counts_ : pool.counts_;
    out.sp_totals_ = pool.has_pooled_sp() ? pool.sp_totals_ : pool.totals_;
    return out;
  }

 private:
  std::size_t idx(int m, int k) const noexcept {
    return static_cast<std::size_t>(m) * labels_ + k;
  }
  void require_group(int m) const {
    if (m < 0 || m >= groups_) throw DomainError("RateTable: group index out of range");
  }
  void require_indices(int m, int k) const {
    require_group(m);
    if (k < 0 || k >= labels_) throw DomainError("RateTable: label index out of range");
  }

  int groups_;
  int labels_;
  double alpha_;
  std::vector<std::int64_t> counts_;    // n_{m,k}
  std::vector<std::int64_t> disagree_;  // d_{m,k}
  std::vector<std::int64_t> totals_;    // n_m
  std::vector<std::int64_t> sp_counts_; // pooled replacement for counts_, if any
  std::vector<std::int64_t> sp_totals_;
};

/// Tally a record set into a RateTable. Records must validate cleanly.
inline RateTable build_rate_table(std::span<const AuditRecord> records, const LabelSpace& ls,
                                  const GroupPartition& gp, double smoothing_alpha = 0.0) {
  if (records.empty()) throw DomainError("build_rate_table: empty record list");
  const RecordValidation check = validate_records(records, ls, gp);
  if (!check.clean())
    throw DomainError("build_rate_table: record " +
                      std::to_string(check.violations.front().record_index) + ": " +
                      check.violations.front().message);
  RateTable table(gp.count(), ls.size(), smoothing_alpha);
  for (const AuditRecord& r : records) table.add(r.group, r.system_label, r.disagreement);
  return table;
}

/// Uniform read access; never substitutes a number for an undefined rate.
inline std::optional<double> rate_at(const RateTable& table, RateKind kind, int m,
                                     std::optional<int> k = std::nullopt) {
  switch (kind) {
    case RateKind::StatisticalParity:
      if (!k) throw DomainError("rate_at: statistical parity needs a label index");
      return table.sp(m, *k);
    case RateKind::DisagreementCell:
      if (!k) throw DomainError("rate_at: cell disagreement needs a label index");
      return table.dr(m, *k);
    case RateKind::DisagreementGroup:
      return table.dr_group(m);
  }
  throw DomainError("rate_at: unknown rate kind");
}

}  // namespace fairaudit
