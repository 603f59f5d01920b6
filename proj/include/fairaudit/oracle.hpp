#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "fairaudit/bounds.hpp"
#include "fairaudit/notions.hpp"

namespace fairaudit {

/// What to do with conditioning events that carry no records when maximising
/// over cells: drop them (default) or treat the cell rate as zero.
enum class UndefinedCellPolicy { Drop, Zero };

/// Exact joint tallies of (group, system label, intrinsic label). This is the
/// ground-truth path: it never reads the disagreement bit, so agreement
/// between notions computed here and notions computed from a RateTable is a
/// genuine two-route check.
class JointTable {
 public:
  JointTable(int group_count, int label_count)
      : groups_(group_count),
        labels_(label_count),
        counts_(static_cast<std::size_t>(group_count) * label_count * label_count, 0),
        totals_(group_count, 0) {
    if (groups_ < 2) throw DomainError("JointTable: need at least 2 groups");
    if (labels_ < 2) throw DomainError("JointTable: need at least 2 labels");
  }

  int group_count() const noexcept { return groups_; }
  int label_count() const noexcept { return labels_; }

  void add(int group, int system_label, int intrinsic_label, std::int64_t weight = 1) {
    require(group, system_label, intrinsic_label);
    counts_[idx(group, system_label, intrinsic_label)] += weight;
    totals_[group] += weight;
  }

  std::int64_t count(int m, int y, int z) const {
    require(m, y, z);
    return counts_[idx(m, y, z)];
  }
  std::int64_t group_total(int m) const {
    require_group(m);
    return totals_[m];
  }
  bool group_defined(int m) const { return group_total(m) > 0; }

  /// n_{m,y}: records in group m with system label y.
  std::int64_t system_label_count(int m, int y) const {
    std::int64_t n = 0;
    for (int z = 0; z < labels_; ++z) n += count(m, y, z);
    return n;
  }

  /// c_{m,z}: records in group m with intrinsic label z.
  std::int64_t intrinsic_label_count(int m, int z) const {
    std::int64_t n = 0;
    for (int y = 0; y < labels_; ++y) n += count(m, y, z);
    return n;
  }

  std::int64_t agree_count(int m, int k) const { return count(m, k, k); }

  /// Per-cell conditional rate for a per-label notion; nullopt when the
  /// conditioning event is empty.
  std::optional<double> cell_rate(Notion kind, int m, int k) const {
    require(m, k, k);
    switch (kind) {
      case Notion::StatisticalParity: {
        const std::int64_t n = group_total(m);
        if (n == 0) return std::nullopt;
        return static_cast<double>(system_label_count(m, k)) / static_cast<double>(n);
      }
      case Notion::Calibration: {  // P(z=k | y=k, m)
        const std::int64_t n = system_label_count(m, k);
        if (n == 0) return std::nullopt;
        return static_cast<double>(agree_count(m, k)) / static_cast<double>(n);
      }
      case Notion::EqualOpportunity: {  // P(y=k | z=k, m)
        const std::int64_t n = intrinsic_label_count(m, k);
        if (n == 0) return std::nullopt;
        return static_cast<double>(agree_count(m, k)) / static_cast<double>(n);
      }
      case Notion::PredictiveEquality: {  // P(y=k | z!=k, m)
        const std::int64_t n = group_total(m) - intrinsic_label_count(m, k);
        if (n == 0) return std::nullopt;
        return static_cast<double>(system_label_count(m, k) - agree_count(m, k)) /
               static_cast<double>(n);
      }
      case Notion::MisclassificationRate: {  // P(y!=k | z=k, m)
        const std::int64_t n = intrinsic_label_count(m, k);
        if (n == 0) return std::nullopt;
        return static_cast<double>(n - agree_count(m, k)) / static_cast<double>(n);
      }
      case Notion::AccuracyEquality:
        throw DomainError("cell_rate: accuracy equality is label-free, use group_accuracy");
    }
    throw DomainError("cell_rate: unknown notion");
  }

  /// AE_m: fraction of group m where the two classifiers coincide.
  std::optional<double> group_accuracy(int m) const {
    const std::int64_t n = group_total(m);
    if (n == 0) return std::nullopt;
    std::int64_t agree = 0;
    for (int k = 0; k < labels_; ++k) agree += agree_count(m, k);
    return static_cast<double>(agree) / static_cast<double>(n);
  }

 private:
  std::size_t idx(int m, int y, int z) const noexcept {
    return (static_cast<std::size_t>(m) * labels_ + y) * labels_ + z;
  }
  void require_group(int m) const {
    if (m < 0 || m >= groups_) throw DomainError("JointTable: group index out of range");
  }
  void require(int m, int y, int z) const {
    require_group(m);
    if (y < 0 || y >= labels_ || z < 0 || z >= labels_)
      throw DomainError("JointTable: label index out of range");
  }

  int groups_;
  int labels_;
  std::vector<std::int64_t> counts_;  // (m, y, z)
  std::vector<std::int64_t> totals_;
};

/// Exact tallies from records; every record must carry an intrinsic label.
inline JointTable build_joint(std::span<const AuditRecord> records, const LabelSpace& ls,
                              const GroupPartition& gp) {
  if (records.empty()) throw DomainError("build_joint: empty record list");
  JointTable joint(gp.count(), ls.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AuditRecord& r = records[i];
    if (!r.intrinsic_label)
      throw DomainError("build_joint: record " + std::to_string(i) +
                        " has no intrinsic label");
    gp.require(r.group, "group");
    ls.require(r.system_label, "system label");
    ls.require(*r.intrinsic_label, "intrinsic label");
    joint.add(r.group, r.system_label, *r.intrinsic_label);
  }
  return joint;
}

/// Ground-truth notion value straight from the joint tallies.
inline NotionValue true_notion(const JointTable& joint, Notion kind,
                               UndefinedCellPolicy policy = UndefinedCellPolicy::Drop) {
  NotionValue out;
  out.kind = kind;
  detail::PairMaxScan scan;
  if (kind == Notion::AccuracyEquality) {
    for (int m = 0; m < joint.group_count(); ++m) {
      const auto v = joint.group_accuracy(m);
      if (!v) {
        ++out.excluded_cells;
        continue;
      }
      scan.feed(0, m, *v);
    }
    if (!scan.any())
      throw DomainError("true_notion: need at least two non-empty groups");
    out.value = scan.value();
    out.argmax_group_hi = scan.group_hi();
    out.argmax_group_lo = scan.group_lo();
    return out;
  }
  for (int k = 0; k < joint.label_count(); ++k)
    for (int m = 0; m < joint.group_count(); ++m) {
      auto v = joint.cell_rate(kind, m, k);
      if (!v) {
        ++out.excluded_cells;
        if (policy == UndefinedCellPolicy::Zero && joint.group_defined(m)) v = 0.0;
      }
      if (v) scan.feed(k, m, *v);
    }
  if (!scan.any())
    throw DomainError("true_notion: no label has rates in two groups");
  out.value = scan.value();
  out.argmax_label = scan.label();
  out.argmax_group_hi = scan.group_hi();
  out.argmax_group_lo = scan.group_lo();
  return out;
}

/// Absolute error of a midpoint estimate against the ground-truth value.
inline double estimation_error(const NotionValue& truth, const BoundedNotion& estimate) {
  if (truth.kind != estimate.kind)
    throw DomainError("estimation_error: notion kinds differ");
  return std::abs(truth.value - estimate.gf_estimate);
}

}  // namespace fairaudit
