// fairaudit command-line front end: audit a dataset, run simulator trials,
// or validate a previously written report.
//
// Exit codes: 0 success, 1 input/config error, 2 invariant violation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fairaudit/fairaudit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInvariantViolation = 2;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw fairaudit::ParseError("cannot write file: " + path.string());
  out << text;
}

struct AuditArgs {
  std::string profiles, responses, schema, from_interchange;
  std::string out, flat, interchange_out;
  std::string sp_mode = "per-critic";
  std::string undefined_cells = "drop";
  double smoothing_alpha = 0.0;
  double binarize_threshold = -1.0;  // <0: keep the schema's rule
};

int run_audit_command(const AuditArgs& args) {
  using namespace fairaudit;
  SchemaConfig schema = load_schema(args.schema);
  if (args.binarize_threshold >= 0.0)
    schema.system_label.binarize_threshold = args.binarize_threshold;

  const LabelSpace ls = label_space(schema);
  const GroupPartition gp = group_partition(schema);

  AuditOptions options;
  options.sp_mode = args.sp_mode == "pooled" ? SpMode::Pooled : SpMode::PerCritic;
  options.smoothing_alpha = args.smoothing_alpha;
  options.undefined_cells = args.undefined_cells == "zero" ? UndefinedCellPolicy::Zero
                                                           : UndefinedCellPolicy::Drop;
  options.binarize_threshold = schema.system_label.binarize_threshold;

  std::vector<CriticFeedback> feedbacks;
  std::optional<RateTable> pooled;
  if (!args.from_interchange.empty()) {
    feedbacks = import_interchange(args.from_interchange, ls, gp);
    if (options.sp_mode == SpMode::Pooled)
      throw ParseError("--sp-mode pooled needs --profiles, not --from-interchange");
  } else {
    const auto profiles = load_profiles(args.profiles, schema);
    const auto responses = load_responses(args.responses, schema);
    feedbacks = join_responses(profiles, responses, ls);
    if (options.sp_mode == SpMode::Pooled) pooled = pooled_sp_table(profiles, ls, gp);
  }
  if (feedbacks.empty()) throw ParseError("no critic feedback after ingestion");

  const AuditReport report =
      run_audit(feedbacks, ls, gp, options, pooled ? &*pooled : nullptr);
  const nlohmann::json doc = report_to_json(report);
  if (!args.out.empty()) write_text(args.out, doc.dump(2) + "\n");
  else std::cout << doc.dump(2) << "\n";
  if (!args.flat.empty()) write_text(args.flat, flat_table(report));
  if (!args.interchange_out.empty()) export_interchange(args.interchange_out, feedbacks);

  std::cerr << "audited " << report.critics.size() << " critics, "
            << report.summary.total_records << " records";
  for (const Notion kind : {Notion::EqualOpportunity, Notion::PredictiveEquality,
                            Notion::MisclassificationRate})
    if (const auto& agg = report.aggregate[static_cast<int>(kind)])
      std::cerr << "; mean |" << notion_code(kind) << " error| = " << agg->mean_error;
  std::cerr << "\n";
  return kExitOk;
}

int run_simulate_command(const std::string& scenario_path, long long trials,
                         std::uint64_t seed, bool seed_set, bool cross_sample,
                         const std::string& out_path) {
  using namespace fairaudit;
  ScenarioSpec spec = load_scenario(scenario_path);
  if (seed_set) spec.seed = seed;
  TrialOptions options;
  options.cross_sample = cross_sample;
  const TrialReport report = containment_trial(spec, trials, options);
  const nlohmann::json doc = trial_report_to_json(report, spec);
  if (!out_path.empty()) write_text(out_path, doc.dump(2) + "\n");
  else std::cout << doc.dump(2) << "\n";
  std::cerr << "ran " << trials << " trials: " << report.total_containment_violations()
            << " containment violations, " << report.total_sandwich_violations()
            << " sandwich violations\n";
  return kExitOk;
}

int run_validate_command(const std::string& report_path) {
  using namespace fairaudit;
  std::ifstream in(report_path);
  if (!in) throw ParseError("cannot open report file: " + report_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("report file " + report_path + ": " + e.what());
  }
  const ReportCheck check = validate_report(doc);
  if (check.ok) {
    std::cout << "report OK: all invariants hold\n";
    return kExitOk;
  }
  std::cout << "report FAILED: " << check.problems.size() << " problem(s)\n";
  for (const auto& problem : check.problems) std::cout << "  - " << problem << "\n";
  return kExitInvariantViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-fairness auditing from binary agree/disagree feedback"};
  app.require_subcommand(1);

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "Audit critic feedback against a classifier");
  audit->add_option("--profiles", audit_args.profiles, "Profiles file (delimited text)");
  audit->add_option("--responses", audit_args.responses, "Responses file (delimited text)");
  audit->add_option("--schema", audit_args.schema, "Schema mapping JSON")->required();
  audit->add_option("--from-interchange", audit_args.from_interchange,
                    "Audit a canonical interchange export instead of raw files");
  audit->add_option("--out", audit_args.out, "Report JSON output path (default: stdout)");
  audit->add_option("--flat", audit_args.flat, "Plot-ready TSV output path");
  audit->add_option("--export-interchange", audit_args.interchange_out,
                    "Write the ingested records as canonical interchange CSV");
  audit->add_option("--sp-mode", audit_args.sp_mode, "Statistical-parity source")
      ->check(CLI::IsMember({"per-critic", "pooled"}))
      ->capture_default_str();
  audit->add_option("--binarize-threshold", audit_args.binarize_threshold,
                    "Override the schema's system-label binarization threshold");
  audit->add_option("--smoothing-alpha", audit_args.smoothing_alpha,
                    "Additive smoothing for rate cells (0 = off)")
      ->capture_default_str();
  audit->add_option("--undefined-cells", audit_args.undefined_cells,
                    "Oracle policy for empty conditioning cells")
      ->check(CLI::IsMember({"drop", "zero"}))
      ->capture_default_str();

  std::string scenario_path, trials_out;
  long long trials = 100;
  std::uint64_t seed = 0;
  bool cross_sample = false;
  auto* simulate = app.add_subcommand("simulate", "Run seeded synthetic-population trials");
  simulate->add_option("--scenario", scenario_path, "Scenario config JSON")->required();
  simulate->add_option("--trials", trials, "Number of trials")->capture_default_str();
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the scenario's base seed");
  simulate->add_flag("--cross-sample", cross_sample,
                     "Score bounds against an independent oracle sample");
  simulate->add_option("--out", trials_out, "Trial report JSON output path (default: stdout)");

  std::string report_path;
  auto* validate = app.add_subcommand("validate", "Re-check a report's invariants");
  validate->add_option("--report", report_path, "Report JSON produced by audit")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (audit->parsed()) {
      if (audit_args.from_interchange.empty() &&
          (audit_args.profiles.empty() || audit_args.responses.empty()))
        throw fairaudit::ParseError(
            "audit needs --profiles and --responses, or --from-interchange");
      return run_audit_command(audit_args);
    }
    if (simulate->parsed())
      return run_simulate_command(scenario_path, trials, seed, seed_opt->count() > 0,
                                  cross_sample, trials_out);
    if (validate->parsed()) return run_validate_command(report_path);
  } catch (const fairaudit::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const fairaudit::DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
