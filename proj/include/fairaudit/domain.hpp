#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairaudit {

/// Contract violation in caller-supplied values (bad index, degenerate input).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed external input (files, configs). Carries row/key context in the message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The classifier's output space: labels are dense indices 0..size-1.
class LabelSpace {
 public:
  explicit LabelSpace(int label_count) : size_(label_count) {
    if (size_ < 2) throw DomainError("LabelSpace: label count must be >= 2");
  }

  int size() const noexcept { return size_; }
  bool contains(int label) const noexcept { return label >= 0 && label < size_; }

  void require(int label, const char* what) const {
    if (!contains(label))
      throw DomainError(std::string(what) + " out of range [0, " +
                        std::to_string(size_) + "): " + std::to_string(label));
  }

 private:
  int size_;
};

/// Flat partition of the population into M named groups. Index 0 is the
/// non-sensitive group by convention; multi-attribute partitions are encoded
/// as a Cartesian product at ingestion time.
class GroupPartition {
 public:
  explicit GroupPartition(std::vector<std::string> names, int non_sensitive_index = 0)
      : names_(std::move(names)), non_sensitive_(non_sensitive_index) {
    if (names_.size() < 2) throw DomainError("GroupPartition: need at least 2 groups");
    if (non_sensitive_ < 0 || non_sensitive_ >= static_cast<int>(names_.size()))
      throw DomainError("GroupPartition: non_sensitive_index out of range");
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j])
          throw DomainError("GroupPartition: duplicate group name '" + names_[i] + "'");
  }

  /// Partition with generated names "group0".."group{M-1}".
  static GroupPartition numbered(int count) {
    std::vector<std::string> names;
    names.reserve(count > 0 ? count : 0);
    for (int m = 0; m < count; ++m) names.push_back("group" + std::to_string(m));
    return GroupPartition(std::move(names));
  }

  int count() const noexcept { return static_cast<int>(names_.size()); }
  const std::string& name(int m) const { return names_.at(m); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  int non_sensitive_index() const noexcept { return non_sensitive_; }
  bool contains(int group) const noexcept { return group >= 0 && group < count(); }

  void require(int group, const char* what) const {
    if (!contains(group))
      throw DomainError(std::string(what) + " out of range [0, " +
                        std::to_string(count()) + "): " + std::to_string(group));
  }

 private:
  std::vector<std::string> names_;
  int non_sensitive_;
};

/// One observation: a group member, the system's label y, the critic's binary
/// disagreement s, and (when known) the critic's intrinsic label z.
/// Invariant when z is present: s == 1 iff z != y.
struct AuditRecord {
  int group = 0;
  int system_label = 0;               // y
  int disagreement = 0;               // s
  std::optional<int> intrinsic_label; // z

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

/// All records contributed by one critic. `record_ids`, when non-empty, is a
/// parallel vector carried through from ingestion for traceability.
struct CriticFeedback {
  std::string critic_id;
  std::vector<AuditRecord> records;
  std::vector<std::string> record_ids;
};

/// s = 1 iff the two labels differ (XOR for a binary label space).
inline int derive_disagreement(const LabelSpace& ls, int system_label, int intrinsic_label) {
  ls.require(system_label, "system label");
  ls.require(intrinsic_label, "intrinsic label");
  return system_label != intrinsic_label ? 1 : 0;
}

struct RecordViolation {
  std::size_t record_index = 0;
  std::string message;
};

struct RecordValidation {
  std::vector<RecordViolation> violations;
  bool clean() const noexcept { return violations.empty(); }
};

/// Report-returning check of every index range plus the s/z consistency rule.
inline RecordValidation validate_records(std::span<const AuditRecord> records,
                                         const LabelSpace& ls, const GroupPartition& gp) {
  RecordValidation report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AuditRecord& r = records[i];
    auto flag = [&](std::string msg) { report.violations.push_back({i, std::move(msg)}); };
    if (!gp.contains(r.group))
      flag("group index " + std::to_string(r.group) + " out of range");
    if (!ls.contains(r.system_label))
      flag("system label " + std::to_string(r.system_label) + " out of range");
    if (r.disagreement != 0 && r.disagreement != 1)
      flag("disagreement bit must be 0 or 1, got " + std::to_string(r.disagreement));
    if (r.intrinsic_label) {
      if (!ls.contains(*r.intrinsic_label)) {
        flag("intrinsic label " + std::to_string(*r.intrinsic_label) + " out of range");
      } else if (ls.contains(r.system_label)) {
        const int expected = r.system_label != *r.intrinsic_label ? 1 : 0;
        if (r.disagreement != expected)
          flag("disagreement bit " + std::to_string(r.disagreement) +
               " inconsistent with labels y=" + std::to_string(r.system_label) +
               ", z=" + std::to_string(*r.intrinsic_label));
      }
    }
  }
  return report;
}

}  // namespace fairaudit
