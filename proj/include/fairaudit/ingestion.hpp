#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/domain.hpp"
#include "fairaudit/rate_table.hpp"

namespace fairaudit {

// ---------------------------------------------------------------------------
// Minimal delimited-text reader: declared header row, optional double-quoted
// fields with "" escapes, tolerant of trailing \r.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_delimited(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote_field(const std::string& value, char delim) {
  if (value.find_first_of(std::string{delim} + "\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace detail

struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require_column(const std::string& name) const {
    const int i = column(name);
    if (i < 0) throw ParseError("missing column '" + name + "'");
    return i;
  }
};

inline DelimitedTable read_delimited(std::istream& in, char delim) {
  DelimitedTable table;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && !first) continue;
    auto fields = detail::split_delimited(line, delim);
    if (first) {
      table.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != table.header.size())
      throw ParseError("row " + std::to_string(lineno) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (first) throw ParseError("file is empty (no header row)");
  return table;
}

inline DelimitedTable read_delimited(const std::filesystem::path& path, char delim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  try {
    return read_delimited(in, delim);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Schema mapping: column roles and value dictionaries, loaded from JSON.
// ---------------------------------------------------------------------------

/// How one column maps to a label index: either an explicit token map or a
/// numeric threshold (value >= threshold -> 1, else 0).
struct LabelRule {
  std::string column;
  std::map<std::string, int> value_map;
  std::optional<double> binarize_threshold;
};

struct AttributeSpec {
  std::string column;
  std::vector<std::string> values;  // token order defines the index
};

struct SchemaConfig {
  int label_count = 2;
  char delimiter = ',';
  std::string profile_record_id;
  LabelRule system_label;
  std::optional<std::string> truth_column;  // pass-through, unused by notions
  std::vector<AttributeSpec> attributes;
  std::string response_critic_id;
  std::string response_record_id;
  LabelRule response;
  bool skip_unknown = false;  // strict by default: unknown tokens are errors
};

namespace detail {

inline LabelRule label_rule_from_json(const nlohmann::json& j, const char* where) {
  LabelRule rule;
  if (j.is_string()) {
    rule.column = j.get<std::string>();
    return rule;
  }
  if (!j.is_object()) throw ParseError(std::string(where) + ": expected string or object");
  rule.column = j.at("column").get<std::string>();
  if (j.contains("map"))
    rule.value_map = j.at("map").get<std::map<std::string, int>>();
  if (j.contains("binarize_threshold"))
    rule.binarize_threshold = j.at("binarize_threshold").get<double>();
  if (rule.value_map.empty() && !rule.binarize_threshold)
    throw ParseError(std::string(where) + ": needs a 'map' or a 'binarize_threshold'");
  return rule;
}

}  // namespace detail

inline SchemaConfig schema_from_json(const nlohmann::json& j) {
  SchemaConfig cfg;
  try {
    cfg.label_count = j.value("label_count", 2);
    const std::string delim = j.value("delimiter", std::string(","));
    if (delim.size() != 1) throw ParseError("schema: delimiter must be one character");
    cfg.delimiter = delim[0];
    const auto& p = j.at("profiles");
    cfg.profile_record_id = p.at("record_id").get<std::string>();
    cfg.system_label = detail::label_rule_from_json(p.at("system_label"), "profiles.system_label");
    if (p.contains("truth_label")) cfg.truth_column = p.at("truth_label").get<std::string>();
    for (const auto& a : p.at("attributes")) {
      AttributeSpec attr;
      attr.column = a.at("column").get<std::string>();
      attr.values = a.at("values").get<std::vector<std::string>>();
      if (attr.values.size() < 2)
        throw ParseError("schema: attribute '" + attr.column + "' needs >= 2 values");
      cfg.attributes.push_back(std::move(attr));
    }
    if (cfg.attributes.empty()) throw ParseError("schema: need at least one attribute");
    const auto& r = j.at("responses");
    cfg.response_critic_id = r.at("critic_id").get<std::string>();
    cfg.response_record_id = r.at("record_id").get<std::string>();
    cfg.response = detail::label_rule_from_json(r.at("response"), "responses.response");
    cfg.skip_unknown = j.value("skip_unknown", false);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  if (cfg.label_count < 2) throw ParseError("schema: label_count must be >= 2");
  return cfg;
}

inline SchemaConfig load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schema file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("schema file " + path.string() + ": " + e.what());
  }
  return schema_from_json(j);
}

inline LabelSpace label_space(const SchemaConfig& cfg) { return LabelSpace(cfg.label_count); }

/// Cartesian-product partition over the schema's attributes; the first
/// attribute varies slowest. Index 0 (all first-listed values) is the
/// non-sensitive group by convention.
inline GroupPartition group_partition(const SchemaConfig& cfg) {
  std::vector<std::string> names{""};
  for (const auto& attr : cfg.attributes) {
    std::vector<std::string> next;
    next.reserve(names.size() * attr.values.size());
    for (const auto& prefix : names)
      for (const auto& value : attr.values)
        next.push_back(prefix.empty() ? attr.column + "=" + value
                                      : prefix + "," + attr.column + "=" + value);
    names = std::move(next);
  }
  return GroupPartition(std::move(names));
}

// ---------------------------------------------------------------------------
// Row types and loaders.
// ---------------------------------------------------------------------------

struct ProfileRow {
  std::string record_id;
  int group = 0;
  int system_label = 0;
  std::optional<int> truth_label;
  std::vector<std::pair<std::string, std::string>> attributes;  // column, raw token
};

struct ResponseRow {
  std::string critic_id;
  std::string record_id;
  int response = 0;  // z
};

namespace detail {

inline int apply_label_rule(const LabelRule& rule, const std::string& token,
                            int label_count, std::size_t row, bool skip_unknown,
                            bool* skipped) {
  if (skipped) *skipped = false;
  if (rule.binarize_threshold) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(token, &pos);
      if (pos != token.size()) throw std::invalid_argument(token);
      return v >= *rule.binarize_threshold ? 1 : 0;
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(row) + ": column '" + rule.column +
                       "': cannot binarize non-numeric value '" + token + "'");
    }
  }
  const auto it = rule.value_map.find(token);
  if (it == rule.value_map.end()) {
    if (skip_unknown && skipped) {
      *skipped = true;
      return -1;
    }
    throw ParseError("row " + std::to_string(row) + ": column '" + rule.column +
                     "': unknown value '" + token + "'");
  }
  if (it->second < 0 || it->second >= label_count)
    throw ParseError("schema maps '" + token + "' to label " +
                     std::to_string(it->second) + " outside [0, " +
                     std::to_string(label_count) + ")");
  return it->second;
}

}  // namespace detail

/// Parse the profiles file and resolve each row to (group index, system label).
/// Row numbers in errors are 1-based data rows (header excluded).
inline std::vector<ProfileRow> load_profiles(const std::filesystem::path& path,
                                             const SchemaConfig& cfg) {
  const DelimitedTable table = read_delimited(path, cfg.delimiter);
  const int id_col = table.require_column(cfg.profile_record_id);
  const int label_col = table.require_column(cfg.system_label.column);
  const int truth_col = cfg.truth_column ? table.require_column(*cfg.truth_column) : -1;
  std::vector<int> attr_cols;
  for (const auto& attr : cfg.attributes) attr_cols.push_back(table.require_column(attr.column));

  std::vector<ProfileRow> rows;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& raw = table.rows[i];
    const std::size_t rowno = i + 1;
    ProfileRow row;
    row.record_id = raw[id_col];
    if (row.record_id.empty())
      throw ParseError(path.string() + ": row " + std::to_string(rowno) + ": empty record id");
    if (const auto it = seen.find(row.record_id); it != seen.end())
      throw ParseError(path.string() + ": row " + std::to_string(rowno) +
                       ": duplicate record id '" + row.record_id + "' (first at row " +
                       std::to_string(it->second) + ")");
    seen.emplace(row.record_id, rowno);

    bool skipped = false;
    int group = 0;
    for (std::size_t a = 0; a < cfg.attributes.size(); ++a) {
      const auto& attr = cfg.attributes[a];
      const std::string& token = raw[attr_cols[a]];
      const auto pos = std::find(attr.values.begin(), attr.values.end(), token);
      if (pos == attr.values.end()) {
        if (cfg.skip_unknown) {
          skipped = true;
          break;
        }
        throw ParseError(path.string() + ": row " + std::to_string(rowno) + ": column '" +
                         attr.column + "': unknown value '" + token + "'");
      }
      group = group * static_cast<int>(attr.values.size()) +
              static_cast<int>(pos - attr.values.begin());
      row.attributes.emplace_back(attr.column, token);
    }
    if (skipped) continue;
    row.group = group;

    try {
      row.system_label = detail::apply_label_rule(cfg.system_label, raw[label_col],
                                                  cfg.label_count, rowno,
                                                  cfg.skip_unknown, &skipped);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    if (skipped) continue;

    if (truth_col >= 0 && !raw[truth_col].empty()) {
      // Pass-through column holding a plain integer label; never fatal.
      try {
        std::size_t pos = 0;
        const int v = std::stoi(raw[truth_col], &pos);
        if (pos == raw[truth_col].size() && v >= 0 && v < cfg.label_count)
          row.truth_label = v;
      } catch (const std::exception&) {
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<ResponseRow> load_responses(const std::filesystem::path& path,
                                               const SchemaConfig& cfg) {
  const DelimitedTable table = read_delimited(path, cfg.delimiter);
  const int critic_col = table.require_column(cfg.response_critic_id);
  const int id_col = table.require_column(cfg.response_record_id);
  const int resp_col = table.require_column(cfg.response.column);

  std::vector<ResponseRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& raw = table.rows[i];
    const std::size_t rowno = i + 1;
    ResponseRow row;
    row.critic_id = raw[critic_col];
    row.record_id = raw[id_col];
    if (row.critic_id.empty() || row.record_id.empty())
      throw ParseError(path.string() + ": row " + std::to_string(rowno) +
                       ": empty critic or record id");
    const auto key = std::make_pair(row.critic_id, row.record_id);
    if (const auto it = seen.find(key); it != seen.end())
      throw ParseError(path.string() + ": row " + std::to_string(rowno) +
                       ": duplicate response for critic '" + row.critic_id +
                       "', record '" + row.record_id + "' (first at row " +
                       std::to_string(it->second) + ")");
    seen.emplace(key, rowno);
    bool skipped = false;
    try {
      row.response = detail::apply_label_rule(cfg.response, raw[resp_col], cfg.label_count,
                                              rowno, cfg.skip_unknown, &skipped);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    if (skipped) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Join responses against profiles: one CriticFeedback per critic (sorted by
/// critic id), records in response order, disagreement derived from (y, z).
inline std::vector<CriticFeedback> join_responses(const std::vector<ProfileRow>& profiles,
                                                  const std::vector<ResponseRow>& responses,
                                                  const LabelSpace& ls) {
  std::map<std::string, const ProfileRow*> by_id;
  for (const auto& p : profiles) by_id.emplace(p.record_id, &p);

  std::vector<std::string> dangling;
  std::map<std::string, CriticFeedback> critics;
  for (const auto& r : responses) {
    const auto it = by_id.find(r.record_id);
    if (it == by_id.end()) {
      dangling.push_back(r.critic_id + "/" + r.record_id);
      continue;
    }
    const ProfileRow& p = *it->second;
    CriticFeedback& fb = critics[r.critic_id];
    fb.critic_id = r.critic_id;
    fb.records.push_back({p.group, p.system_label,
                          derive_disagreement(ls, p.system_label, r.response), r.response});
    fb.record_ids.push_back(r.record_id);
  }
  if (!dangling.empty()) {
    std::string msg = "responses reference unknown record ids (" +
                      std::to_string(dangling.size()) + "):";
    for (std::size_t i = 0; i < dangling.size() && i < 10; ++i) msg += " " + dangling[i];
    if (dangling.size() > 10) msg += " ...";
    throw ParseError(msg);
  }
  std::vector<CriticFeedback> out;
  out.reserve(critics.size());
  for (auto& [id, fb] : critics) out.push_back(std::move(fb));
  return out;
}

// ---------------------------------------------------------------------------
// Dataset summary and pooled statistical parity.
// ---------------------------------------------------------------------------

struct DatasetSummary {
  long long critic_count = 0;
  long long total_records = 0;
  long long min_records_per_critic = 0;
  long long max_records_per_critic = 0;
  std::vector<std::int64_t> group_occupancy;              // records per group
  std::vector<std::vector<std::int64_t>> label_marginals; // [group][label]
};

inline DatasetSummary summarize_dataset(const std::vector<CriticFeedback>& feedbacks,
                                        const LabelSpace& ls, const GroupPartition& gp) {
  DatasetSummary out;
  out.group_occupancy.assign(gp.count(), 0);
  out.label_marginals.assign(gp.count(), std::vector<std::int64_t>(ls.size(), 0));
  out.critic_count = static_cast<long long>(feedbacks.size());
  for (const auto& fb : feedbacks) {
    const long long n = static_cast<long long>(fb.records.size());
    out.total_records += n;
    if (out.min_records_per_critic == 0 || n < out.min_records_per_critic)
      out.min_records_per_critic = n;
    out.max_records_per_critic = std::max(out.max_records_per_critic, n);
    for (const auto& r : fb.records) {
      gp.require(r.group, "group");
      ls.require(r.system_label, "system label");
      out.group_occupancy[r.group] += 1;
      out.label_marginals[r.group][r.system_label] += 1;
    }
  }
  return out;
}

inline nlohmann::json summary_to_json(const DatasetSummary& s) {
  return nlohmann::json{{"critic_count", s.critic_count},
                        {"total_records", s.total_records},
                        {"min_records_per_critic", s.min_records_per_critic},
                        {"max_records_per_critic", s.max_records_per_critic},
                        {"group_occupancy", s.group_occupancy},
                        {"label_marginals", s.label_marginals}};
}

/// Statistical-parity source built from the profile pool (for --sp-mode pooled).
inline RateTable pooled_sp_table(const std::vector<ProfileRow>& profiles,
                                 const LabelSpace& ls, const GroupPartition& gp) {
  if (profiles.empty()) throw DomainError("pooled_sp_table: no profiles");
  RateTable table(gp.count(), ls.size());
  for (const auto& p : profiles) {
    gp.require(p.group, "group");
    ls.require(p.system_label, "system label");
    table.add(p.group, p.system_label, 0);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Canonical interchange format: one row per record,
// critic_id,record_id,group_index,y,z,s. Lossless round-trip.
// ---------------------------------------------------------------------------

inline void export_interchange(std::ostream& out,
                               const std::vector<CriticFeedback>& feedbacks) {
  out << "critic_id,record_id,group_index,y,z,s\n";
  for (const auto& fb : feedbacks)
    for (std::size_t i = 0; i < fb.records.size(); ++i) {
      const AuditRecord& r = fb.records[i];
      const std::string rid = i < fb.record_ids.size() ? fb.record_ids[i] : "";
      out << detail::quote_field(fb.critic_id, ',') << ','
          << detail::quote_field(rid, ',') << ',' << r.group << ',' << r.system_label
          << ',';
      if (r.intrinsic_label) out << *r.intrinsic_label;
      out << ',' << r.disagreement << '\n';
    }
}

inline void export_interchange(const std::filesystem::path& path,
                               const std::vector<CriticFeedback>& feedbacks) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write interchange file: " + path.string());
  export_interchange(out, feedbacks);
}

inline std::vector<CriticFeedback> import_interchange(std::istream& in, const LabelSpace& ls,
                                                      const GroupPartition& gp) {
  DelimitedTable table = read_delimited(in, ',');
  const int critic_col = table.require_column("critic_id");
  const int rid_col = table.require_column("record_id");
  const int group_col = table.require_column("group_index");
  const int y_col = table.require_column("y");
  const int z_col = table.require_column("z");
  const int s_col = table.require_column("s");

  auto parse_int = [](const std::string& field, std::size_t row, const char* what) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(field, &pos);
      if (pos != field.size()) throw std::invalid_argument(field);
      return v;
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(row) + ": bad " + what + " '" + field + "'");
    }
  };

  std::map<std::string, CriticFeedback> critics;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& raw = table.rows[i];
    const std::size_t rowno = i + 1;
    AuditRecord rec;
    rec.group = parse_int(raw[group_col], rowno, "group index");
    rec.system_label = parse_int(raw[y_col], rowno, "system label");
    rec.disagreement = parse_int(raw[s_col], rowno, "disagreement bit");
    if (!raw[z_col].empty()) rec.intrinsic_label = parse_int(raw[z_col], rowno, "intrinsic label");
    CriticFeedback& fb = critics[raw[critic_col]];
    fb.critic_id = raw[critic_col];
    fb.records.push_back(rec);
    fb.record_ids.push_back(raw[rid_col]);
  }
  std::vector<CriticFeedback> out;
  out.reserve(critics.size());
  for (auto& [id, fb] : critics) {
    const RecordValidation check = validate_records(fb.records, ls, gp);
    if (!check.clean())
      throw ParseError("interchange: critic '" + id + "', record " +
                       std::to_string(check.violations.front().record_index) + ": " +
                       check.violations.front().message);
    out.push_back(std::move(fb));
  }
  return out;
}

inline std::vector<CriticFeedback> import_interchange(const std::filesystem::path& path,
                                                      const LabelSpace& ls,
                                                      const GroupPartition& gp) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open interchange file: " + path.string());
  try {
    return import_interchange(in, ls, gp);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace fairaudit
