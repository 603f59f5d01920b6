#pragma once

#include <optional>
#include <vector>

#include "fairaudit/notions.hpp"

namespace fairaudit {

/// Probability masses at one (group, label) cell, all conditioned on the group:
///   agree_mass       = (1 - DR_{m,k}) * SP_{m,k}   -- system says k, critic agrees
///   disagree_mass    = DR_{m,k} * SP_{m,k}         -- system says k, critic disagrees
///   other_label_mass = 1 - SP_{m,k}                -- system says anything but k
/// agree_mass + disagree_mass == SP_{m,k}; other_label_mass uses the simplex
/// identity instead of summing the K-1 remaining parity terms.
struct CellTerms {
  double agree_mass = 0.0;
  double disagree_mass = 0.0;
  double other_label_mass = 0.0;
};

inline CellTerms cell_terms(double sp, double dr) {
  return {(1.0 - dr) * sp, dr * sp, 1.0 - sp};
}

inline std::optional<CellTerms> cell_terms(const RateTable& table, int m, int k) {
  const auto sp = table.sp(m, k);
  const auto dr = table.dr(m, k);
  if (!sp || !dr) return std::nullopt;
  return cell_terms(*sp, *dr);
}

/// Floor on the true-positive rate P(y=k | z=k, m) achievable from
/// disagreement data alone. The 0/0 corner (single-label group with total
/// disagreement) yields the vacuous floor 0.
inline double eo_lower_bound(const CellTerms& t) {
  const double den = t.agree_mass + t.other_label_mass;
  if (den <= 0.0) return 0.0;
  return t.agree_mass / den;
}

/// Floor on the false-positive rate P(y=k | z!=k, m). Undefined when the
/// conditioning event z != k carries no mass (SP_{m,k} = 1 with no
/// disagreement).
inline std::optional<double> pe_lower_bound(const CellTerms& t) {
  const double den = t.disagree_mass + t.other_label_mass;
  if (den <= 0.0) return std::nullopt;
  return t.disagree_mass / den;
}

/// Complement of eo_lower_bound. Note the direction: on rates and outcomes
/// drawn from one sample, the empirical misclassification rate
/// P(y!=k | z=k, m) never exceeds this value, so it acts as a cap even
/// though it is published as the bound paired with U_{m,k} = 1.
inline double omr_lower_bound(const CellTerms& t) {
  const double den = t.agree_mass + t.other_label_mass;
  if (den <= 0.0) return 0.0;
  return t.other_label_mass / den;
}

inline std::optional<double> eo_lower_bound(const RateTable& table, int m, int k) {
  const auto t = cell_terms(table, m, k);
  if (!t) return std::nullopt;
  return eo_lower_bound(*t);
}

inline std::optional<double> pe_lower_bound(const RateTable& table, int m, int k) {
  const auto t = cell_terms(table, m, k);
  if (!t) return std::nullopt;
  return pe_lower_bound(*t);
}

inline std::optional<double> omr_lower_bound(const RateTable& table, int m, int k) {
  const auto t = cell_terms(table, m, k);
  if (!t) return std::nullopt;
  return omr_lower_bound(*t);
}

/// Per-cell interval [L_{m,k}, U_{m,k}] enclosing an unknown rate R_{m,k}.
/// Callers may supply any uppers; the stock pipeline uses U = 1 but sharper
/// bounds plug in here.
class CellBounds {
 public:
  CellBounds(int group_count, int label_count)
      : groups_(group_count),
        labels_(label_count),
        lower_(static_cast<std::size_t>(group_count) * label_count, 0.0),
        upper_(static_cast<std::size_t>(group_count) * label_count, 1.0),
        defined_(static_cast<std::size_t>(group_count) * label_count, 0) {
    if (groups_ < 2) throw DomainError("CellBounds: need at least 2 groups");
    if (labels_ < 1) throw DomainError("CellBounds: need at least 1 label");
  }

  int group_count() const noexcept { return groups_; }
  int label_count() const noexcept { return labels_; }

  void set(int m, int k, double lower, double upper) {
    require(m, k);
    if (lower > upper) throw DomainError("CellBounds: lower exceeds upper");
    lower_[idx(m, k)] = lower;
    upper_[idx(m, k)] = upper;
    defined_[idx(m, k)] = 1;
  }

  bool defined(int m, int k) const {
    require(m, k);
    return defined_[idx(m, k)] != 0;
  }
  double lower(int m, int k) const {
    require(m, k);
    return lower_[idx(m, k)];
  }
  double upper(int m, int k) const {
    require(m, k);
    return upper_[idx(m, k)];
  }

  long long defined_count() const {
    long long n = 0;
    for (char c : defined_) n += c;
    return n;
  }

 private:
  std::size_t idx(int m, int k) const noexcept {
    return static_cast<std::size_t>(m) * labels_ + k;
  }
  void require(int m, int k) const {
    if (m < 0 || m >= groups_ || k < 0 || k >= labels_)
      throw DomainError("CellBounds: index out of range");
  }

  int groups_;
  int labels_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<char> defined_;
};

struct GfBounds {
  double lower = 0.0;
  double upper = 0.0;
  int lower_label = -1, lower_group_hi = -1, lower_group_lo = -1;
  int upper_label = -1, upper_group_hi = -1, upper_group_lo = -1;
};

/// Group-fairness interval from per-cell intervals:
///   lower = max_k max_{m != m'} (L_{m,k} - U_{m',k})
///   upper = max_k max_{m != m'} (U_{m,k} - L_{m',k})
/// Only labels with defined cells in at least two groups participate.
inline GfBounds gf_bounds(const CellBounds& cells) {
  GfBounds out;
  bool found = false;
  for (int k = 0; k < cells.label_count(); ++k) {
    std::vector<int> groups;
    for (int m = 0; m < cells.group_count(); ++m)
      if (cells.defined(m, k)) groups.push_back(m);
    if (groups.size() < 2) continue;
    for (int a : groups)
      for (int b : groups) {
        if (a == b) continue;
        const double lo = cells.lower(a, k) - cells.upper(b, k);
        const double hi = cells.upper(a, k) - cells.lower(b, k);
        if (!found || lo > out.lower) {
          out.lower = lo;
          out.lower_label = k;
          out.lower_group_hi = a;
          out.lower_group_lo = b;
        }
        if (!found || hi > out.upper) {
          out.upper = hi;
          out.upper_label = k;
          out.upper_group_hi = a;
          out.upper_group_lo = b;
        }
        found = true;
      }
  }
  if (!found) throw DomainError("gf_bounds: no label has bounds in two groups");
  return out;
}

/// Midpoint of a bound interval.
inline double gf_estimate(double gf_lower, double gf_upper) {
  if (gf_lower > gf_upper) throw DomainError("gf_estimate: inverted bounds");
  return 0.5 * (gf_lower + gf_upper);
}

/// An indefinite notion: interval for the group-fairness score plus the
/// midpoint estimate, with argmax locations and the count of undefined rate
/// cells that could not contribute bounds.
struct BoundedNotion {
  Notion kind = Notion::EqualOpportunity;
  double gf_lower = 0.0;
  double gf_upper = 0.0;
  double gf_estimate = 0.0;
  int lower_label = -1, lower_group_hi = -1, lower_group_lo = -1;
  int upper_label = -1, upper_group_hi = -1, upper_group_lo = -1;
  long long excluded_cells = 0;
};

/// Cell intervals for one indefinite notion: the notion's disagreement-rate
/// floor below, `upper` (default 1) above. Cells without rates stay undefined.
inline CellBounds lower_bound_cells(const RateTable& table, Notion kind, double upper = 1.0) {
  if (is_definite(kind)) throw DomainError("lower_bound_cells: notion is definite");
  CellBounds cells(table.group_count(), table.label_count());
  for (int m = 0; m < table.group_count(); ++m)
    for (int k = 0; k < table.label_count(); ++k) {
      const auto t = cell_terms(table, m, k);
      if (!t) continue;
      switch (kind) {
        case Notion::EqualOpportunity:
          cells.set(m, k, eo_lower_bound(*t), upper);
          break;
        case Notion::PredictiveEquality: {
          const auto lo = pe_lower_bound(*t);
          if (lo) cells.set(m, k, *lo, upper);
          break;
        }
        case Notion::MisclassificationRate:
          cells.set(m, k, omr_lower_bound(*t), upper);
          break;
        default:
          break;
      }
    }
  return cells;
}

inline BoundedNotion bounded_from_cells(Notion kind, const CellBounds& cells,
                                        long long excluded_cells = 0) {
  const GfBounds gf = gf_bounds(cells);
  BoundedNotion out;
  out.kind = kind;
  out.gf_lower = gf.lower;
  out.gf_upper = gf.upper;
  out.gf_estimate = gf_estimate(gf.lower, gf.upper);
  out.lower_label = gf.lower_label;
  out.lower_group_hi = gf.lower_group_hi;
  out.lower_group_lo = gf.lower_group_lo;
  out.upper_label = gf.upper_label;
  out.upper_group_hi = gf.upper_group_hi;
  out.upper_group_lo = gf.upper_group_lo;
  out.excluded_cells = excluded_cells;
  return out;
}

/// Full pipeline for one indefinite notion on one rate table.
inline BoundedNotion bounded_notion(const RateTable& table, Notion kind) {
  const CellBounds cells = lower_bound_cells(table, kind);
  const long long total_cells =
      static_cast<long long>(table.group_count()) * table.label_count();
  return bounded_from_cells(kind, cells, total_cells - cells.defined_count());
}

}  // namespace fairaudit
