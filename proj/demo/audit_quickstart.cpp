// Minimal library walkthrough: build records for two critics by hand, compute
// the definite notions, bound the indefinite ones, and compare against the
// ground-truth oracle.

#include <iostream>

#include "fairaudit/fairaudit.hpp"

using namespace fairaudit;

int main() {
  const LabelSpace labels(2);
  const GroupPartition groups({"group_a", "group_b"});

  // (group, y, s, z): disagreement s is derived from the two labels.
  std::vector<AuditRecord> records;
  auto add = [&](int group, int y, int z) {
    records.push_back({group, y, derive_disagreement(labels, y, z), z});
  };
  // group_a: system mostly says 1, critic often disagrees at label 1
  add(0, 1, 1); add(0, 1, 0); add(0, 1, 1); add(0, 0, 0); add(0, 1, 0); add(0, 0, 0);
  // group_b: system balanced, critic agrees except once at label 0
  add(1, 0, 0); add(1, 0, 1); add(1, 1, 1); add(1, 1, 1); add(1, 0, 0); add(1, 1, 1);

  const RateTable table = build_rate_table(records, labels, groups);
  const JointTable joint = build_joint(records, labels, groups);

  std::cout << "definite notions (exact):\n";
  for (const Notion kind :
       {Notion::StatisticalParity, Notion::AccuracyEquality, Notion::Calibration}) {
    const NotionValue v = kind == Notion::StatisticalParity ? statistical_parity(table)
                          : kind == Notion::AccuracyEquality ? accuracy_equality(table)
                                                             : calibration(table);
    std::cout << "  " << notion_code(kind) << " = " << v.value << "  (oracle "
              << true_notion(joint, kind).value << ")\n";
  }

  std::cout << "indefinite notions (bounded):\n";
  for (const Notion kind : {Notion::EqualOpportunity, Notion::PredictiveEquality,
                            Notion::MisclassificationRate}) {
    const BoundedNotion b = bounded_notion(table, kind);
    std::cout << "  " << notion_code(kind) << " in [" << b.gf_lower << ", " << b.gf_upper
              << "], estimate " << b.gf_estimate << "  (oracle "
              << true_notion(joint, kind).value << ")\n";
  }
  return 0;
}
