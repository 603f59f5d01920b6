#include <catch2/catch_amalgamated.hpp>

#include "fairaudit/report.hpp"
#include "fairaudit/simulator.hpp"

using namespace fairaudit;
using Catch::Matchers::WithinAbs;

namespace {

const std::filesystem::path kData = FAIRAUDIT_TEST_DATA_DIR;

std::vector<CriticFeedback> fixture_feedbacks(const SchemaConfig& cfg) {
  const LabelSpace ls = label_space(cfg);
  return join_responses(load_profiles(kData / "profiles.csv", cfg),
                        load_responses(kData / "responses.csv", cfg), ls);
}

}  // namespace

TEST_CASE("audit of the fixture dataset produces a coherent report", "[report]") {
  const SchemaConfig cfg = load_schema(kData / "schema.json");
  const LabelSpace ls = label_space(cfg);
  const GroupPartition gp = group_partition(cfg);
  const AuditOptions options;
  const AuditReport report = run_audit(fixture_feedbacks(cfg), ls, gp, options);

  REQUIRE(report.critics.size() == 3);
  CHECK(report.critics[0].critic_id == "c1");
  CHECK(report.summary.total_records == 20);
  CHECK(report.label_count == 2);
  CHECK(report.group_names.size() == 4);

  // c2 echoes the system: accuracy equality and calibration vanish exactly
  const CriticReport& echo = report.critics[1];
  CHECK(echo.entry(Notion::AccuracyEquality).estimate == 0.0);
  CHECK(echo.entry(Notion::Calibration).estimate == 0.0);
  REQUIRE(echo.entry(Notion::AccuracyEquality).true_value.has_value());
  CHECK(*echo.entry(Notion::AccuracyEquality).true_value == 0.0);
  CHECK(*echo.entry(Notion::AccuracyEquality).abs_error == 0.0);

  for (const auto& critic : report.critics)
    for (int i = 0; i < kNotionCount; ++i) {
      const NotionEntry& e = critic.notions[i];
      if (!e.defined) {
        CHECK_FALSE(e.skip_reason.empty());
        continue;
      }
      CHECK(e.lower <= e.estimate);
      CHECK(e.estimate <= e.upper);
      if (e.abs_error) CHECK(*e.abs_error >= 0.0);
    }

  // aggregates exist for the indefinite notions and match the critic entries
  for (const Notion kind : {Notion::EqualOpportunity, Notion::PredictiveEquality,
                            Notion::MisclassificationRate}) {
    const auto& agg = report.aggregate[static_cast<int>(kind)];
    REQUIRE(agg.has_value());
    double sum = 0.0;
    long long n = 0;
    for (const auto& critic : report.critics) {
      const NotionEntry& e = critic.entry(kind);
      if (e.defined && e.abs_error) {
        sum += *e.abs_error;
        ++n;
      }
    }
    CHECK(agg->critics == n);
    CHECK_THAT(agg->mean_error, WithinAbs(sum / static_cast<double>(n), 1e-12));
    CHECK(agg->min_error <= agg->mean_error);
    CHECK(agg->mean_error <= agg->max_error);
  }
}

TEST_CASE("audit is deterministic and parity is shared across critics", "[report]") {
  const SchemaConfig cfg = load_schema(kData / "schema.json");
  const LabelSpace ls = label_space(cfg);
  const GroupPartition gp = group_partition(cfg);
  const AuditOptions options;

  const AuditReport a = run_audit(fixture_feedbacks(cfg), ls, gp, options);
  const AuditReport b = run_audit(fixture_feedbacks(cfg), ls, gp, options);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());

  // c1 and c2 rated the same eight profiles: their statistical parity is
  // bit-identical even though their responses are opposite
  CHECK(a.critics[0].entry(Notion::StatisticalParity).estimate ==
        a.critics[1].entry(Notion::StatisticalParity).estimate);
}

TEST_CASE("echo critics over balanced profiles zero all definite notions", "[report]") {
  const LabelSpace ls(2);
  const GroupPartition gp = GroupPartition::numbered(2);
  std::vector<CriticFeedback> critics;
  for (int c = 0; c < 4; ++c) {
    CriticFeedback fb;
    fb.critic_id = "echo" + std::to_string(c);
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 5; ++i) fb.records.push_back({m, k, 0, k});
    critics.push_back(std::move(fb));
  }
  const AuditReport report = run_audit(critics, ls, gp, {});
  for (const auto& critic : report.critics) {
    CHECK(critic.entry(Notion::StatisticalParity).estimate == 0.0);
    CHECK(critic.entry(Notion::AccuracyEquality).estimate == 0.0);
    CHECK(critic.entry(Notion::Calibration).estimate == 0.0);
    for (const Notion kind : {Notion::EqualOpportunity, Notion::PredictiveEquality,
                              Notion::MisclassificationRate}) {
      const NotionEntry& e = critic.entry(kind);
      REQUIRE(e.defined);
      REQUIRE(e.true_value.has_value());
      CHECK(*e.true_value == 0.0);
      CHECK_THAT(*e.abs_error, WithinAbs(std::abs(e.estimate), 1e-15));
    }
  }
}

TEST_CASE("pipeline errors equal independently recomputed oracle errors", "[report]") {
  // simulated critics with a known joint; the report's error column must match
  // an estimation_error computed outside the report path
  ScenarioSpec spec;
  spec.label_count = 2;
  spec.group_count = 2;
  spec.samples_per_group = 120;
  spec.joints = {{0.45, 0.05, 0.15, 0.35}, {0.3, 0.2, 0.05, 0.45}};
  const LabelSpace ls(2);
  const GroupPartition gp = GroupPartition::numbered(2);

  std::vector<CriticFeedback> critics;
  for (int c = 0; c < 6; ++c) {
    spec.seed = 100 + c;
    critics.push_back({"sim" + std::to_string(c), sample_population(spec), {}});
  }
  const AuditOptions options;
  const AuditReport report = run_audit(critics, ls, gp, options);

  for (const auto& critic : report.critics) {
    const auto it = std::find_if(critics.begin(), critics.end(),
                                 [&](const CriticFeedback& fb) {
                                   return fb.critic_id == critic.critic_id;
                                 });
    REQUIRE(it != critics.end());
    const RateTable table = build_rate_table(it->records, ls, gp);
    const JointTable joint = build_joint(it->records, ls, gp);
    for (const Notion kind : {Notion::EqualOpportunity, Notion::PredictiveEquality,
                              Notion::MisclassificationRate}) {
      const NotionEntry& e = critic.entry(kind);
      REQUIRE(e.defined);
      REQUIRE(e.abs_error.has_value());
      const double expected =
          estimation_error(true_notion(joint, kind), bounded_notion(table, kind));
      CHECK_THAT(*e.abs_error, WithinAbs(expected, 1e-12));
    }
  }
}

TEST_CASE("degenerate critics get skip reasons instead of crashes", "[report]") {
  const LabelSpace ls(2);
  const GroupPartition gp = GroupPartition::numbered(2);
  std::vector<CriticFeedback> critics;
  CriticFeedback lonely;
  lonely.critic_id = "one-group";
  lonely.records = {{0, 0, 0, 0}, {0, 1, 1, 0}};
  critics.push_back(lonely);
  CriticFeedback fine;
  fine.critic_id = "two-groups";
  fine.records = {{0, 0, 0, 0}, {0, 1, 0, 1}, {1, 0, 0, 0}, {1, 1, 0, 1}};
  critics.push_back(fine);

  const AuditReport report = run_audit(critics, ls, gp, {});
  const CriticReport& bad = report.critics[0];
  CHECK_FALSE(bad.entry(Notion::StatisticalParity).defined);
  CHECK_FALSE(bad.entry(Notion::EqualOpportunity).defined);
  CHECK_FALSE(bad.entry(Notion::StatisticalParity).skip_reason.empty());
  CHECK(report.critics[1].entry(Notion::StatisticalParity).defined);
}

TEST_CASE("report JSON validates and catches corruption", "[report]") {
  const SchemaConfig cfg = load_schema(kData / "schema.json");
  const LabelSpace ls = label_space(cfg);
  const GroupPartition gp = group_partition(cfg);
  const AuditReport report = run_audit(fixture_feedbacks(cfg), ls, gp, {});
  nlohmann::json doc = report_to_json(report);

  CHECK(validate_report(doc).ok);

  SECTION("estimate nudged outside its bounds") {
    doc["critics"][0]["notions"]["EO"]["estimate"] = 5.0;
    const ReportCheck check = validate_report(doc);
    CHECK_FALSE(check.ok);
    bool names_critic = false;
    for (const auto& p : check.problems)
      if (p.find("c1") != std::string::npos) names_critic = true;
    CHECK(names_critic);
  }
  SECTION("aggregate mean tampered") {
    doc["aggregate"]["EO"]["mean_error"] = 0.999;
    CHECK_FALSE(validate_report(doc).ok);
  }
  SECTION("missing version key") {
    doc.erase("fairaudit_report");
    CHECK_FALSE(validate_report(doc).ok);
  }
}

TEST_CASE("flat table is plot-ready", "[report]") {
  const SchemaConfig cfg = load_schema(kData / "schema.json");
  const LabelSpace ls = label_space(cfg);
  const GroupPartition gp = group_partition(cfg);
  const AuditReport report = run_audit(fixture_feedbacks(cfg), ls, gp, {});
  const std::string table = flat_table(report);

  std::istringstream in(table);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "critic_id\tnotion\ttrue\tlower\tupper\testimate\terror");
  long long rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * kNotionCount);
}

TEST_CASE("pooled parity mode pins SP to the profile pool", "[report]") {
  const SchemaConfig cfg = load_schema(kData / "schema.json");
  const LabelSpace ls = label_space(cfg);
  const GroupPartition gp = group_partition(cfg);
  const auto profiles = load_profiles(kData / "profiles.csv", cfg);
  const auto feedbacks = fixture_feedbacks(cfg);
  const RateTable pool = pooled_sp_table(profiles, ls, gp);

  AuditOptions options;
  options.sp_mode = SpMode::Pooled;
  const AuditReport report = run_audit(feedbacks, ls, gp, options, &pool);
  CHECK(report.sp_mode == "pooled");
  // every critic now reports the pool's parity gap, including c3 who only
  // rated half the profiles
  const double sp0 = report.critics[0].entry(Notion::StatisticalParity).estimate;
  for (const auto& critic : report.critics)
    CHECK(critic.entry(Notion::StatisticalParity).estimate == sp0);

  CHECK_THROWS_AS(run_audit(feedbacks, ls, gp, options, nullptr), DomainError);
}
