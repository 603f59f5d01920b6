#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/bounds.hpp"
#include "fairaudit/ingestion.hpp"
#include "fairaudit/notions.hpp"
#include "fairaudit/oracle.hpp"

namespace fairaudit {

enum class SpMode { PerCritic, Pooled };

inline const char* sp_mode_name(SpMode m) {
  return m == SpMode::PerCritic ? "per-critic" : "pooled";
}
inline const char* cell_policy_name(UndefinedCellPolicy p) {
  return p == UndefinedCellPolicy::Drop ? "drop" : "zero";
}

struct AuditOptions {
  SpMode sp_mode = SpMode::PerCritic;
  double smoothing_alpha = 0.0;
  UndefinedCellPolicy undefined_cells = UndefinedCellPolicy::Drop;
  std::optional<double> binarize_threshold;  // echoed into the report fingerprint
};

/// One notion's result for one critic. Definite notions carry a point value
/// (lower == upper == estimate); indefinite notions carry the bound interval
/// and its midpoint. Oracle values and errors are present when the critic's
/// records carry intrinsic labels and the notion is defined on both routes.
struct NotionEntry {
  bool defined = false;
  std::string skip_reason;
  double lower = 0.0;
  double upper = 0.0;
  double estimate = 0.0;
  std::optional<double> true_value;
  std::optional<double> abs_error;
  int argmax_label = -1;
  int argmax_group_hi = -1;
  int argmax_group_lo = -1;
  long long excluded_cells = 0;
};

struct CriticReport {
  std::string critic_id;
  long long record_count = 0;
  std::array<NotionEntry, kNotionCount> notions;  // indexed by static_cast<int>(Notion)

  const NotionEntry& entry(Notion n) const { return notions[static_cast<int>(n)]; }
  NotionEntry& entry(Notion n) { return notions[static_cast<int>(n)]; }
};

struct AggregateStats {
  long long critics = 0;
  double mean_error = 0.0;
  double min_error = 0.0;
  double max_error = 0.0;
  double median_estimate = 0.0;
};

struct AuditReport {
  // Config fingerprint: everything a reader needs to reproduce the numbers.
  std::string sp_mode = "per-critic";
  double smoothing_alpha = 0.0;
  std::string undefined_cells = "drop";
  std::optional<double> binarize_threshold;
  int label_count = 0;
  std::vector<std::string> group_names;

  DatasetSummary summary;
  std::vector<CriticReport> critics;  // ordered by critic_id
  std::array<std::optional<AggregateStats>, kNotionCount> aggregate;  // EO/PE/OMR
};

namespace detail {

inline void fill_definite(NotionEntry& e, const NotionValue& v) {
  e.defined = true;
  e.lower = e.upper = e.estimate = v.value;
  e.argmax_label = v.argmax_label;
  e.argmax_group_hi = v.argmax_group_hi;
  e.argmax_group_lo = v.argmax_group_lo;
  e.excluded_cells = v.excluded_cells;
}

inline void fill_bounded(NotionEntry& e, const BoundedNotion& b) {
  e.defined = true;
  e.lower = b.gf_lower;
  e.upper = b.gf_upper;
  e.estimate = b.gf_estimate;
  e.argmax_label = b.upper_label;
  e.argmax_group_hi = b.upper_group_hi;
  e.argmax_group_lo = b.upper_group_lo;
  e.excluded_cells = b.excluded_cells;
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

/// Audit one critic: rates, definite values, bound intervals, oracle truths
/// and absolute errors. Degenerate inputs (one occupied group, no shared
/// labels) surface as undefined entries with the error text, never as a crash.
inline CriticReport audit_critic(const CriticFeedback& feedback, const LabelSpace& ls,
                                 const GroupPartition& gp, const AuditOptions& options,
                                 const RateTable* pooled_sp = nullptr) {
  CriticReport report;
  report.critic_id = feedback.critic_id;
  report.record_count = static_cast<long long>(feedback.records.size());

  RateTable table = build_rate_table(feedback.records, ls, gp, options.smoothing_alpha);
  if (options.sp_mode == SpMode::Pooled) {
    if (pooled_sp == nullptr)
      throw DomainError("audit_critic: pooled SP mode needs a pooled table");
    table = table.with_pooled_sp(*pooled_sp);
  }

  bool have_joint = true;
  for (const auto& r : feedback.records)
    if (!r.intrinsic_label) {
      have_joint = false;
      break;
    }
  std::optional<JointTable> joint;
  if (have_joint) joint = build_joint(feedback.records, ls, gp);

  auto oracle_value = [&](Notion kind) -> std::optional<NotionValue> {
    if (!joint) return std::nullopt;
    try {
      return true_notion(*joint, kind, options.undefined_cells);
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };

  for (int i = 0; i < kNotionCount; ++i) {
    const Notion kind = static_cast<Notion>(i);
    NotionEntry& entry = report.entry(kind);
    try {
      if (is_definite(kind)) {
        const NotionValue v = kind == Notion::StatisticalParity ? statistical_parity(table)
                              : kind == Notion::AccuracyEquality ? accuracy_equality(table)
                                                                 : calibration(table);
        detail::fill_definite(entry, v);
      } else {
        detail::fill_bounded(entry, bounded_notion(table, kind));
      }
    } catch (const DomainError& e) {
      entry.defined = false;
      entry.skip_reason = e.what();
      continue;
    }
    if (const auto truth = oracle_value(kind)) {
      entry.true_value = truth->value;
      entry.abs_error = std::abs(truth->value - entry.estimate);
    }
  }
  return report;
}

/// Full audit: per-critic reports ordered by critic id plus aggregate error
/// statistics for the indefinite notions. Deterministic for fixed inputs.
inline AuditReport run_audit(const std::vector<CriticFeedback>& feedbacks,
                             const LabelSpace& ls, const GroupPartition& gp,
                             const AuditOptions& options,
                             const RateTable* pooled_sp = nullptr) {
  if (feedbacks.empty()) throw DomainError("run_audit: no critics");
  AuditReport report;
  report.sp_mode = sp_mode_name(options.sp_mode);
  report.smoothing_alpha = options.smoothing_alpha;
  report.undefined_cells = cell_policy_name(options.undefined_cells);
  report.binarize_threshold = options.binarize_threshold;
  report.label_count = ls.size();
  report.group_names = gp.names();
  report.summary = summarize_dataset(feedbacks, ls, gp);

  for (const auto& fb : feedbacks)
    report.critics.push_back(audit_critic(fb, ls, gp, options, pooled_sp));
  std::sort(report.critics.begin(), report.critics.end(),
            [](const CriticReport& a, const CriticReport& b) {
              return a.critic_id < b.critic_id;
            });

  for (const Notion kind : {Notion::EqualOpportunity, Notion::PredictiveEquality,
                            Notion::MisclassificationRate}) {
    std::vector<double> errors, estimates;
    for (const auto& critic : report.critics) {
      const NotionEntry& e = critic.entry(kind);
      if (!e.defined) continue;
      estimates.push_back(e.estimate);
      if (e.abs_error) errors.push_back(*e.abs_error);
    }
    if (errors.empty()) continue;
    AggregateStats stats;
    stats.critics = static_cast<long long>(errors.size());
    double sum = 0.0;
    stats.min_error = errors.front();
    stats.max_error = errors.front();
    for (double err : errors) {
      sum += err;
      stats.min_error = std::min(stats.min_error, err);
      stats.max_error = std::max(stats.max_error, err);
    }
    stats.mean_error = sum / static_cast<double>(errors.size());
    stats.median_estimate = detail::median(estimates);
    report.aggregate[static_cast<int>(kind)] = stats;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization. Keys are emitted sorted (nlohmann object semantics), doubles
// round-trip, so a report is byte-stable for fixed inputs and config.
// ---------------------------------------------------------------------------

inline nlohmann::json notion_entry_to_json(const NotionEntry& e) {
  if (!e.defined) return nlohmann::json{{"defined", false}, {"reason", e.skip_reason}};
  nlohmann::json j{{"defined", true},
                   {"lower", e.lower},
                   {"upper", e.upper},
                   {"estimate", e.estimate},
                   {"excluded_cells", e.excluded_cells},
                   {"argmax", {{"label", e.argmax_label},
                               {"group_hi", e.argmax_group_hi},
                               {"group_lo", e.argmax_group_lo}}}};
  j["true"] = e.true_value ? nlohmann::json(*e.true_value) : nlohmann::json();
  j["error"] = e.abs_error ? nlohmann::json(*e.abs_error) : nlohmann::json();
  return j;
}

inline nlohmann::json report_to_json(const AuditReport& report) {
  nlohmann::json critics = nlohmann::json::array();
  for (const auto& critic : report.critics) {
    nlohmann::json notions;
    for (int i = 0; i < kNotionCount; ++i)
      notions[notion_code(static_cast<Notion>(i))] =
          notion_entry_to_json(critic.notions[i]);
    critics.push_back({{"critic_id", critic.critic_id},
                       {"records", critic.record_count},
                       {"notions", notions}});
  }
  nlohmann::json aggregate;
  for (int i = 0; i < kNotionCount; ++i) {
    if (!report.aggregate[i]) continue;
    const AggregateStats& s = *report.aggregate[i];
    aggregate[notion_code(static_cast<Notion>(i))] = {{"critics", s.critics},
                                                      {"mean_error", s.mean_error},
                                                      {"min_error", s.min_error},
                                                      {"max_error", s.max_error},
                                                      {"median_estimate", s.median_estimate}};
  }
  return nlohmann::json{
      {"fairaudit_report", 1},
      {"config",
       {{"sp_mode", report.sp_mode},
        {"smoothing_alpha", report.smoothing_alpha},
        {"undefined_cells", report.undefined_cells},
        {"binarize_threshold", report.binarize_threshold
                                   ? nlohmann::json(*report.binarize_threshold)
                                   : nlohmann::json()},
        {"label_count", report.label_count},
        {"groups", report.group_names}}},
      {"summary", summary_to_json(report.summary)},
      {"critics", critics},
      {"aggregate", aggregate}};
}

/// Plot-ready flat table, one row per (critic, notion). Undefined fields are NA.
inline std::string flat_table(const AuditReport& report) {
  std::ostringstream out;
  out << "critic_id\tnotion\ttrue\tlower\tupper\testimate\terror\n";
  out.precision(17);
  auto cell = [&](const std::optional<double>& v) {
    if (v) out << *v;
    else out << "NA";
    out << '\t';
  };
  for (const auto& critic : report.critics)
    for (int i = 0; i < kNotionCount; ++i) {
      const NotionEntry& e = critic.notions[i];
      out << critic.critic_id << '\t' << notion_code(static_cast<Notion>(i)) << '\t';
      if (!e.defined) {
        out << "NA\tNA\tNA\tNA\tNA\n";
        continue;
      }
      cell(e.true_value);
      out << e.lower << '\t' << e.upper << '\t' << e.estimate << '\t';
      if (e.abs_error) out << *e.abs_error;
      else out << "NA";
      out << '\n';
    }
  return out.str();
}

// ---------------------------------------------------------------------------
// Report validation: re-checks every invariant a well-formed report promises.
// ---------------------------------------------------------------------------

struct ReportCheck {
  bool ok = true;
  std::vector<std::string> problems;

  void fail(std::string msg) {
    ok = false;
    problems.push_back(std::move(msg));
  }
};

inline ReportCheck validate_report(const nlohmann::json& j) {
  constexpr double kTol = 1e-12;
  ReportCheck check;
  try {
    if (!j.contains("fairaudit_report")) {
      check.fail("not a fairaudit report (missing version key)");
      return check;
    }
    if (!j.contains("config")) check.fail("missing config fingerprint");
    const auto& critics = j.at("critics");
    struct Agg {
      std::vector<double> errors, estimates;
    };
    std::map<std::string, Agg> recomputed;
    for (const auto& critic : critics) {
      const std::string id = critic.at("critic_id").get<std::string>();
      for (const auto& [code, entry] : critic.at("notions").items()) {
        if (!entry.at("defined").get<bool>()) continue;
        const double lower = entry.at("lower").get<double>();
        const double upper = entry.at("upper").get<double>();
        const double estimate = entry.at("estimate").get<double>();
        if (estimate < lower - kTol || estimate > upper + kTol)
          check.fail("critic " + id + " " + code + ": estimate outside bounds");
        if (std::abs(estimate - 0.5 * (lower + upper)) > kTol)
          check.fail("critic " + id + " " + code + ": estimate is not the midpoint");
        if (!entry.at("true").is_null() && !entry.at("error").is_null()) {
          const double truth = entry.at("true").get<double>();
          const double error = entry.at("error").get<double>();
          if (error < 0.0) check.fail("critic " + id + " " + code + ": negative error");
          if (std::abs(error - std::abs(truth - estimate)) > kTol)
            check.fail("critic " + id + " " + code + ": error does not match |true - estimate|");
          recomputed[code].errors.push_back(error);
        }
        if (code == "EO" || code == "PE" || code == "OMR")
          recomputed[code].estimates.push_back(estimate);
      }
    }
    for (const auto& [code, agg] : j.at("aggregate").items()) {
      const auto it = recomputed.find(code);
      if (it == recomputed.end() || it->second.errors.empty()) {
        check.fail("aggregate " + code + ": no matching per-critic errors");
        continue;
      }
      const auto& errors = it->second.errors;
      double sum = 0.0, lo = errors.front(), hi = errors.front();
      for (double e : errors) {
        sum += e;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
      if (agg.at("critics").get<long long>() != static_cast<long long>(errors.size()))
        check.fail("aggregate " + code + ": critic count mismatch");
      if (std::abs(agg.at("mean_error").get<double>() - sum / errors.size()) > kTol)
        check.fail("aggregate " + code + ": mean error mismatch");
      if (std::abs(agg.at("min_error").get<double>() - lo) > kTol)
        check.fail("aggregate " + code + ": min error mismatch");
      if (std::abs(agg.at("max_error").get<double>() - hi) > kTol)
        check.fail("aggregate " + code + ": max error mismatch");
      if (std::abs(agg.at("median_estimate").get<double>() -
                   detail::median(it->second.estimates)) > kTol)
        check.fail("aggregate " + code + ": median estimate mismatch");
    }
  } catch (const nlohmann::json::exception& e) {
    check.fail(std::string("malformed report: ") + e.what());
  }
  return check;
}

}  // namespace fairaudit
