#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <json.hpp>

#include "fairaudit/oracle.hpp"
#include "fairaudit/rate_table.hpp"

namespace fairaudit {

/// A synthetic population: per group m, a known joint distribution P_m over
/// (system label y, intrinsic label z), sampled `samples_per_group` times.
/// Matrices are row-major with y as the row index: joints[m][y*K + z].
struct ScenarioSpec {
  int label_count = 2;
  int group_count = 2;
  std::int64_t samples_per_group = 100;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> joints;
};

inline void validate_scenario(const ScenarioSpec& spec) {
  if (spec.label_count < 2) throw DomainError("scenario: label_count must be >= 2");
  if (spec.group_count < 2) throw DomainError("scenario: group_count must be >= 2");
  if (spec.samples_per_group <= 0)
    throw DomainError("scenario: samples_per_group must be positive");
  if (static_cast<int>(spec.joints.size()) != spec.group_count)
    throw DomainError("scenario: need one joint matrix per group");
  const std::size_t cells =
      static_cast<std::size_t>(spec.label_count) * spec.label_count;
  for (int m = 0; m < spec.group_count; ++m) {
    const auto& p = spec.joints[m];
    if (p.size() != cells)
      throw DomainError("scenario: joint matrix for group " + std::to_string(m) +
                        " must have K*K entries");
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw DomainError("scenario: joint entries must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DomainError("scenario: joint matrix for group " + std::to_string(m) +
                        " does not sum to 1");
  }
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec spec;
  try {
    spec.label_count = j.at("label_count").get<int>();
    spec.group_count = j.at("group_count").get<int>();
    spec.samples_per_group = j.at("samples_per_group").get<std::int64_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.joints = j.at("joints").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario config: ") + e.what());
  }
  validate_scenario(spec);
  // Store each matrix normalised so analytic marginals are an exact simplex.
  for (auto& p : spec.joints) {
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
  }
  return spec;
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  return nlohmann::json{{"label_count", spec.label_count},
                        {"group_count", spec.group_count},
                        {"samples_per_group", spec.samples_per_group},
                        {"seed", spec.seed},
                        {"joints", spec.joints}};
}

inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scenario file " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

namespace detail {

// Fixed 53-bit mapping to [0,1) so streams depend only on the mt19937_64
// algorithm, not on library-specific distribution code.
inline double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::pair<int, int> sample_cell(const std::vector<double>& joint, int label_count,
                                       std::mt19937_64& rng) {
  const double u = uniform53(rng);
  double acc = 0.0;
  for (std::size_t c = 0; c < joint.size(); ++c) {
    acc += joint[c];
    if (u < acc)
      return {static_cast<int>(c) / label_count, static_cast<int>(c) % label_count};
  }
  const int last = static_cast<int>(joint.size()) - 1;  // u landed in rounding slack
  return {last / label_count, last % label_count};
}

}  // namespace detail

/// Draw samples_per_group i.i.d. records per group; groups in index order,
/// one mt19937_64 stream seeded with spec.seed. Deterministic per seed.
inline std::vector<AuditRecord> sample_population(const ScenarioSpec& spec) {
  validate_scenario(spec);
  std::mt19937_64 rng(spec.seed);
  std::vector<AuditRecord> records;
  records.reserve(static_cast<std::size_t>(spec.group_count) * spec.samples_per_group);
  for (int m = 0; m < spec.group_count; ++m)
    for (std::int64_t i = 0; i < spec.samples_per_group; ++i) {
      const auto [y, z] = detail::sample_cell(spec.joints[m], spec.label_count, rng);
      records.push_back({m, y, y != z ? 1 : 0, z});
    }
  return records;
}

/// Closed-form rates of a scenario: parity and disagreement marginals plus
/// the exact conditional cells every notion maximises over.
struct PopulationRates {
  int group_count = 0;
  int label_count = 0;
  std::vector<double> sp;                          // m*K + k, always defined
  std::vector<std::optional<double>> dr;           // undefined where SP=0
  std::vector<std::optional<double>> calibration;  // P(z=k | y=k, m)
  std::vector<std::optional<double>> eo;           // P(y=k | z=k, m)
  std::vector<std::optional<double>> pe;           // P(y=k | z!=k, m)
  std::vector<std::optional<double>> omr;          // P(y!=k | z=k, m)
  std::vector<double> accuracy;                    // P(y=z | m)

  std::size_t idx(int m, int k) const {
    return static_cast<std::size_t>(m) * label_count + k;
  }
};

inline PopulationRates population_rates(const ScenarioSpec& spec) {
  validate_scenario(spec);
  const int K = spec.label_count;
  PopulationRates out;
  out.group_count = spec.group_count;
  out.label_count = K;
  const std::size_t cells = static_cast<std::size_t>(spec.group_count) * K;
  out.sp.assign(cells, 0.0);
  out.dr.assign(cells, std::nullopt);
  out.calibration.assign(cells, std::nullopt);
  out.eo.assign(cells, std::nullopt);
  out.pe.assign(cells, std::nullopt);
  out.omr.assign(cells, std::nullopt);
  out.accuracy.assign(spec.group_count, 0.0);
  for (int m = 0; m < spec.group_count; ++m) {
    const auto& p = spec.joints[m];
    double trace = 0.0;
    for (int k = 0; k < K; ++k) trace += p[static_cast<std::size_t>(k) * K + k];
    out.accuracy[m] = trace;
    for (int k = 0; k < K; ++k) {
      double row = 0.0, col = 0.0;
      for (int l = 0; l < K; ++l) {
        row += p[static_cast<std::size_t>(k) * K + l];
        col += p[static_cast<std::size_t>(l) * K + k];
      }
      const double diag = p[static_cast<std::size_t>(k) * K + k];
      out.sp[out.idx(m, k)] = row;
      if (row > 0.0) {
        out.dr[out.idx(m, k)] = 1.0 - diag / row;
        out.calibration[out.idx(m, k)] = diag / row;
      }
      if (col > 0.0) {
        out.eo[out.idx(m, k)] = diag / col;
        out.omr[out.idx(m, k)] = 1.0 - diag / col;
      }
      if (1.0 - col > 0.0) out.pe[out.idx(m, k)] = (row - diag) / (1.0 - col);
    }
  }
  return out;
}

/// Population-level ground truth of a notion, maximised over defined cells.
inline NotionValue population_true_notion(const PopulationRates& rates, Notion kind) {
  NotionValue out;
  out.kind = kind;
  detail::PairMaxScan scan;
  if (kind == Notion::AccuracyEquality) {
    for (int m = 0; m < rates.group_count; ++m) scan.feed(0, m, rates.accuracy[m]);
  } else {
    const std::vector<std::optional<double>>* cells = nullptr;
    std::vector<std::optional<double>> sp_cells;
    switch (kind) {
      case Notion::StatisticalParity:
        sp_cells.assign(rates.sp.begin(), rates.sp.end());
        cells = &sp_cells;
        break;
      case Notion::Calibration: cells = &rates.calibration; break;
      case Notion::EqualOpportunity: cells = &rates.eo; break;
      case Notion::PredictiveEquality: cells = &rates.pe; break;
      case Notion::MisclassificationRate: cells = &rates.omr; break;
      default: break;
    }
    for (int k = 0; k < rates.label_count; ++k)
      for (int m = 0; m < rates.group_count; ++m) {
        const auto& v = (*cells)[rates.idx(m, k)];
        if (!v) {
          ++out.excluded_cells;
          continue;
        }
        scan.feed(k, m, *v);
      }
  }
  if (!scan.any()) throw DomainError("population_true_notion: no comparable cells");
  out.value = scan.value();
  out.argmax_label = kind == Notion::AccuracyEquality ? -1 : scan.label();
  out.argmax_group_hi = scan.group_hi();
  out.argmax_group_lo = scan.group_lo();
  return out;
}

// ---------------------------------------------------------------------------
// Theory checks: per-cell containment and the bound-interval sandwich.
//
// On rates and outcomes taken from the same sample these are arithmetic
// identities: the equal-opportunity and predictive-equality floors never
// exceed the empirical cell rates, and the misclassification quantity
// (complement of the equal-opportunity floor) never falls below the
// empirical misclassification rate. The checks below verify each relation
// in its provable direction.
// ---------------------------------------------------------------------------

struct ContainmentCheck {
  long long cells_checked = 0;
  long long violations = 0;
  double max_complement_gap = 0.0;  // worst |EO cell + OMR cell - 1|, both routes
};

inline ContainmentCheck check_containment(const RateTable& table, const JointTable& joint,
                                          Notion kind, double tolerance = 1e-12) {
  if (is_definite(kind)) throw DomainError("check_containment: notion is definite");
  ContainmentCheck out;
  for (int m = 0; m < table.group_count(); ++m)
    for (int k = 0; k < table.label_count(); ++k) {
      const auto terms = cell_terms(table, m, k);
      if (!terms) continue;
      const auto truth = joint.cell_rate(kind, m, k);
      if (!truth) continue;
      ++out.cells_checked;
      bool ok = *truth >= -tolerance && *truth <= 1.0 + tolerance;
      switch (kind) {
        case Notion::EqualOpportunity:
          ok = ok && *truth >= eo_lower_bound(*terms) - tolerance;
          break;
        case Notion::PredictiveEquality: {
          const auto lo = pe_lower_bound(*terms);
          if (lo) ok = ok && *truth >= *lo - tolerance;
          break;
        }
        case Notion::MisclassificationRate: {
          ok = ok && *truth <= omr_lower_bound(*terms) + tolerance;
          const auto eo_truth = joint.cell_rate(Notion::EqualOpportunity, m, k);
          const double bound_gap =
              std::abs(eo_lower_bound(*terms) + omr_lower_bound(*terms) - 1.0);
          out.max_complement_gap = std::max(out.max_complement_gap, bound_gap);
          if (eo_truth)
            out.max_complement_gap =
                std::max(out.max_complement_gap, std::abs(*eo_truth + *truth - 1.0));
          break;
        }
        default:
          break;
      }
      if (!ok) ++out.violations;
    }
  return out;
}

/// Sandwich check for one notion on one sample. Bound cells and empirical
/// cells are restricted to positions defined on both routes; without that
/// alignment the group-level max on either side can range over cells the
/// other side cannot see and the comparison is meaningless.
struct TheoremCheck {
  bool applicable = false;  // some label has two aligned groups
  long long aligned_cells = 0;
  double gf_true = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double estimate = 0.0;
  bool midpoint_exact = false;
  bool sandwich_ok = false;
};

inline TheoremCheck theorem_check(const RateTable& table, const JointTable& joint,
                                  Notion kind, double tolerance = 1e-12) {
  if (is_definite(kind)) throw DomainError("theorem_check: notion is definite");
  TheoremCheck out;
  CellBounds cells(table.group_count(), table.label_count());
  detail::PairMaxScan truth_scan;
  for (int k = 0; k < table.label_count(); ++k) {
    // Collect the label's aligned groups first: the truth scan must see a
    // label only when two aligned groups exist for it.
    std::vector<std::pair<int, std::pair<double, std::pair<double, double>>>> row;
    for (int m = 0; m < table.group_count(); ++m) {
      const auto terms = cell_terms(table, m, k);
      if (!terms) continue;
      const auto truth = joint.cell_rate(kind, m, k);
      if (!truth) continue;
      double lo = 0.0, hi = 1.0;
      switch (kind) {
        case Notion::EqualOpportunity:
          lo = eo_lower_bound(*terms);
          break;
        case Notion::PredictiveEquality: {
          const auto bound = pe_lower_bound(*terms);
          if (!bound) continue;
          lo = *bound;
          break;
        }
        case Notion::MisclassificationRate:
          hi = omr_lower_bound(*terms);  // valid cap on the empirical rate
          break;
        default:
          break;
      }
      row.push_back({m, {*truth, {lo, hi}}});
    }
    if (row.size() < 2) continue;
    for (const auto& [m, payload] : row) {
      cells.set(m, k, payload.second.first, payload.second.second);
      truth_scan.feed(k, m, payload.first);
      ++out.aligned_cells;
    }
  }
  if (!truth_scan.any()) return out;  // not applicable on this sample
  out.applicable = true;
  out.gf_true = truth_scan.value();
  const GfBounds gf = gf_bounds(cells);
  out.lower = gf.lower;
  out.upper = gf.upper;
  out.estimate = gf_estimate(gf.lower, gf.upper);
  out.midpoint_exact = out.estimate == 0.5 * (gf.lower + gf.upper) &&
                       gf.lower <= out.estimate && out.estimate <= gf.upper;
  out.sandwich_ok = out.gf_true >= gf.lower - tolerance &&
                    out.gf_true <= gf.upper + tolerance &&
                    std::abs(out.estimate - out.gf_true) <=
                        0.5 * (gf.upper - gf.lower) + tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Trial campaigns.
// ---------------------------------------------------------------------------

struct TrialOptions {
  bool cross_sample = false;  // rates from one sample, oracle from a fresh one
  double tolerance = 1e-12;
};

struct KindTrialStats {
  long long trials_applicable = 0;
  long long cells_checked = 0;
  long long containment_violations = 0;
  long long sandwich_violations = 0;
  long long midpoint_violations = 0;
  double max_complement_gap = 0.0;
  double mean_abs_error = 0.0;  // |aligned midpoint - aligned truth|
  double max_abs_error = 0.0;
  double mean_halfwidth = 0.0;
};

struct TrialReport {
  std::uint64_t base_seed = 0;
  long long trials = 0;
  bool cross_sample = false;
  std::int64_t records_per_trial = 0;
  KindTrialStats eo, pe, omr;

  long long total_containment_violations() const {
    return eo.containment_violations + pe.containment_violations +
           omr.containment_violations;
  }
  long long total_sandwich_violations() const {
    return eo.sandwich_violations + pe.sandwich_violations + omr.sandwich_violations;
  }
};

/// Run seeded trials of a scenario (trial seed = base seed + trial index) and
/// tally containment violations, sandwich violations and estimate errors.
/// With same-sample rates the expected violation count is zero; in
/// cross-sample mode violations are possible and merely reported.
inline TrialReport containment_trial(const ScenarioSpec& spec, long long trials,
                                     const TrialOptions& options = {}) {
  validate_scenario(spec);
  if (trials <= 0) throw DomainError("containment_trial: trials must be positive");
  const LabelSpace ls(spec.label_count);
  const GroupPartition gp = GroupPartition::numbered(spec.group_count);
  TrialReport report;
  report.base_seed = spec.seed;
  report.trials = trials;
  report.cross_sample = options.cross_sample;
  report.records_per_trial =
      spec.samples_per_group * static_cast<std::int64_t>(spec.group_count);

  const Notion kinds[] = {Notion::EqualOpportunity, Notion::PredictiveEquality,
                          Notion::MisclassificationRate};
  double err_sum[3] = {0, 0, 0}, width_sum[3] = {0, 0, 0};
  for (long long t = 0; t < trials; ++t) {
    ScenarioSpec trial = spec;
    trial.seed = spec.seed + static_cast<std::uint64_t>(t);
    const auto records = sample_population(trial);
    const RateTable table = build_rate_table(records, ls, gp);
    ScenarioSpec oracle_spec = trial;
    if (options.cross_sample)
      oracle_spec.seed = spec.seed + static_cast<std::uint64_t>(trials + t);
    const auto oracle_records =
        options.cross_sample ? sample_population(oracle_spec) : records;
    const JointTable joint = build_joint(oracle_records, ls, gp);

    for (int i = 0; i < 3; ++i) {
      KindTrialStats& stats = i == 0 ? report.eo : i == 1 ? report.pe : report.omr;
      const ContainmentCheck cc =
          check_containment(table, joint, kinds[i], options.tolerance);
      stats.cells_checked += cc.cells_checked;
      stats.containment_violations += cc.violations;
      stats.max_complement_gap = std::max(stats.max_complement_gap, cc.max_complement_gap);
      const TheoremCheck tc = theorem_check(table, joint, kinds[i], options.tolerance);
      if (!tc.applicable) continue;
      ++stats.trials_applicable;
      if (!tc.sandwich_ok) ++stats.sandwich_violations;
      if (!tc.midpoint_exact) ++stats.midpoint_violations;
      const double err = std::abs(tc.estimate - tc.gf_true);
      err_sum[i] += err;
      width_sum[i] += 0.5 * (tc.upper - tc.lower);
      stats.max_abs_error = std::max(stats.max_abs_error, err);
    }
  }
  KindTrialStats* all[3] = {&report.eo, &report.pe, &report.omr};
  for (int i = 0; i < 3; ++i) {
    if (all[i]->trials_applicable == 0) continue;
    all[i]->mean_abs_error = err_sum[i] / static_cast<double>(all[i]->trials_applicable);
    all[i]->mean_halfwidth = width_sum[i] / static_cast<double>(all[i]->trials_applicable);
  }
  return report;
}

inline nlohmann::json trial_stats_to_json(const KindTrialStats& s) {
  return nlohmann::json{{"trials_applicable", s.trials_applicable},
                        {"cells_checked", s.cells_checked},
                        {"containment_violations", s.containment_violations},
                        {"sandwich_violations", s.sandwich_violations},
                        {"midpoint_violations", s.midpoint_violations},
                        {"max_complement_gap", s.max_complement_gap},
                        {"mean_abs_error", s.mean_abs_error},
                        {"max_abs_error", s.max_abs_error},
                        {"mean_halfwidth", s.mean_halfwidth}};
}

inline nlohmann::json trial_report_to_json(const TrialReport& r, const ScenarioSpec& spec) {
  return nlohmann::json{{"scenario", scenario_to_json(spec)},
                        {"rng", "mt19937_64"},
                        {"base_seed", r.base_seed},
                        {"trials", r.trials},
                        {"cross_sample", r.cross_sample},
                        {"records_per_trial", r.records_per_trial},
                        {"EO", trial_stats_to_json(r.eo)},
                        {"PE", trial_stats_to_json(r.pe)},
                        {"OMR", trial_stats_to_json(r.omr)},
                        {"total_containment_violations", r.total_containment_violations()},
                        {"total_sandwich_violations", r.total_sandwich_violations()}};
}

}  // namespace fairaudit
