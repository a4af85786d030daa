#pragma once

// Tabular ingestion and preprocessing. A Dataset is column-major: continuous
// columns are double arrays (NaN marks missing until impute), categorical
// columns are integer codes into a per-column label vocabulary (kMissingCode
// marks missing until impute). Transforms never mutate in place; they return
// new datasets so callers can keep the raw view alongside the cleaned one.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "glassgam/common.hpp"

namespace glassgam {

enum class ColumnKind { continuous, categorical };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  bool allowed_missing = true;
};

inline constexpr std::int32_t kMissingCode = -1;

struct CategoricalColumn {
  std::vector<std::int32_t> codes;   // kMissingCode until impute()
  std::vector<std::string> labels;   // code -> label
  std::int32_t sentinel_code = -1;   // >= 0 once impute() materialized a missing category

  std::int32_t code_of(std::string_view label) const {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (labels[c] == label) return static_cast<std::int32_t>(c);
    }
    return kMissingCode;
  }
};

using Column = std::variant<std::vector<double>, CategoricalColumn>;

struct Dataset {
  std::vector<ColumnSchema> schema;  // feature columns only
  std::vector<Column> columns;       // parallel to schema
  std::vector<int> labels;           // binary outcome, 0/1
  std::vector<std::string> group_ids;  // empty when no group column
  std::size_t n_rows = 0;

  bool has_groups() const { return !group_ids.empty(); }

  std::size_t col_index(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].name == name) return i;
    }
    throw SchemaError("unknown column: '" + std::string(name) + "'");
  }

  const std::vector<double>& continuous_col(std::size_t i) const {
    if (schema[i].kind != ColumnKind::continuous) {
      throw SchemaError("column '" + schema[i].name + "' is not continuous");
    }
    return std::get<std::vector<double>>(columns[i]);
  }

  const CategoricalColumn& categorical_col(std::size_t i) const {
    if (schema[i].kind != ColumnKind::categorical) {
      throw SchemaError("column '" + schema[i].name + "' is not categorical");
    }
    return std::get<CategoricalColumn>(columns[i]);
  }
};

// ---------------------------------------------------------------------------
// CSV loading

struct CsvSpec {
  std::vector<ColumnSchema> features;
  std::string label_column = "label";
  std::string group_column;   // empty = no groups
  char delimiter = ',';
  std::string missing_token;  // recognized in addition to the empty cell
};

namespace detail {

inline bool cell_missing(const std::string& cell, const CsvSpec& spec) {
  const auto t = trim(cell);
  return t.empty() || (!spec.missing_token.empty() && t == spec.missing_token);
}

}  // namespace detail

// Parses delimiter-separated text with a header row. The header must contain
// every schema column, the label column, and the group column when requested;
// any extra column is a schema error. No quoting support: cells must not
// contain the delimiter.
inline Dataset load_csv_text(std::string_view text, const CsvSpec& spec) {
  if (spec.features.empty()) throw SchemaError("csv spec has no feature columns");
  std::set<std::string> expected;
  for (const auto& f : spec.features) {
    if (!expected.insert(f.name).second) {
      throw SchemaError("duplicate feature in schema: '" + f.name + "'");
    }
  }
  if (expected.count(spec.label_column)) {
    throw SchemaError("label column collides with a feature: '" + spec.label_column + "'");
  }
  expected.insert(spec.label_column);
  if (!spec.group_column.empty()) {
    if (!expected.insert(spec.group_column).second) {
      throw SchemaError("group column collides with another column");
    }
  }

  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        std::string_view line = text.substr(start, i - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        start = i + 1;
      }
    }
  }
  if (lines.empty()) throw ParseError("csv has no header row");

  const auto header = split_line(lines[0], spec.delimiter);
  std::map<std::string, std::size_t> col_pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    if (!expected.count(name)) {
      throw SchemaError("unexpected column in header: '" + name + "'");
    }
    if (!col_pos.emplace(name, i).second) {
      throw SchemaError("duplicate column in header: '" + name + "'");
    }
  }
  for (const auto& name : expected) {
    if (!col_pos.count(name)) throw SchemaError("column missing from header: '" + name + "'");
  }

  Dataset d;
  d.schema = spec.features;
  d.n_rows = lines.size() - 1;
  d.columns.reserve(spec.features.size());
  for (const auto& f : spec.features) {
    if (f.kind == ColumnKind::continuous) {
      d.columns.emplace_back(std::vector<double>());
      std::get<std::vector<double>>(d.columns.back()).reserve(d.n_rows);
    } else {
      CategoricalColumn c;
      c.codes.reserve(d.n_rows);
      d.columns.emplace_back(std::move(c));
    }
  }
  d.labels.reserve(d.n_rows);
  if (!spec.group_column.empty()) d.group_ids.reserve(d.n_rows);

  const std::size_t label_pos = col_pos.at(spec.label_column);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_line(lines[r], spec.delimiter);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t f = 0; f < spec.features.size(); ++f) {
      const auto& sc = spec.features[f];
      const std::string& cell = cells[col_pos.at(sc.name)];
      const bool missing = detail::cell_missing(cell, spec);
      if (missing && !sc.allowed_missing) {
        throw ValueError("missing value in column '" + sc.name + "' at row " +
                         std::to_string(r) + ", which disallows missing");
      }
      if (sc.kind == ColumnKind::continuous) {
        auto& col = std::get<std::vector<double>>(d.columns[f]);
        if (missing) {
          col.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
          try {
            col.push_back(parse_double(cell));
          } catch (const ParseError&) {
            throw ParseError("column '" + sc.name + "' row " + std::to_string(r) +
                             ": not a number: '" + cell + "'");
          }
        }
      } else {
        auto& col = std::get<CategoricalColumn>(d.columns[f]);
        if (missing) {
          col.codes.push_back(kMissingCode);
        } else {
          const std::string label(trim(cell));
          std::int32_t code = col.code_of(label);
          if (code == kMissingCode) {
            code = static_cast<std::int32_t>(col.labels.size());
            col.labels.push_back(label);
          }
          col.codes.push_back(code);
        }
      }
    }
    const std::string label_cell(trim(cells[label_pos]));
    if (label_cell == "0") {
      d.labels.push_back(0);
    } else if (label_cell == "1") {
      d.labels.push_back(1);
    } else {
      throw ValueError("label at row " + std::to_string(r) + " is '" + label_cell +
                       "', expected 0 or 1");
    }
    if (!spec.group_column.empty()) {
      d.group_ids.emplace_back(trim(cells[col_pos.at(spec.group_column)]));
    }
  }
  return d;
}

inline Dataset load_csv(const std::string& path, const CsvSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open csv file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_csv_text(buf.str(), spec);
}

// ---------------------------------------------------------------------------
// Plausibility filters

enum class FilterPredicate { greater_than, less_than, negative };

struct PlausibilityRule {
  std::string column;
  FilterPredicate predicate = FilterPredicate::negative;
  double threshold = 0.0;  // unused for `negative`
};

struct RuleDrops {
  PlausibilityRule rule;
  std::size_t rows_dropped = 0;
};

struct FilterReport {
  std::vector<RuleDrops> per_rule;
  std::size_t rows_dropped_total = 0;
  std::size_t rows_kept = 0;
};

namespace detail {

inline bool rule_fires(const PlausibilityRule& rule, double v) {
  if (std::isnan(v)) return false;  // missing values never trigger a rule
  switch (rule.predicate) {
    case FilterPredicate::greater_than:
      return v > rule.threshold;
    case FilterPredicate::less_than:
      return v < rule.threshold;
    case FilterPredicate::negative:
      return v < 0.0;
  }
  return false;
}

}  // namespace detail

inline Dataset take_rows(const Dataset& d, const std::vector<std::uint32_t>& rows);

// Drops every row on which any rule fires. Per-rule counts attribute a row to
// each rule it violates, so they can sum to more than the total dropped.
// Rules apply to continuous columns only.
inline std::pair<Dataset, FilterReport> apply_filters(
    const Dataset& d, const std::vector<PlausibilityRule>& rules) {
  FilterReport report;
  report.per_rule.reserve(rules.size());
  std::vector<const std::vector<double>*> rule_cols;
  rule_cols.reserve(rules.size());
  for (const auto& rule : rules) {
    const std::size_t idx = d.col_index(rule.column);
    rule_cols.push_back(&d.continuous_col(idx));
    report.per_rule.push_back({rule, 0});
  }
  std::vector<std::uint32_t> kept;
  kept.reserve(d.n_rows);
  for (std::size_t r = 0; r < d.n_rows; ++r) {
    bool drop = false;
    for (std::size_t k = 0; k < rules.size(); ++k) {
      if (detail::rule_fires(rules[k], (*rule_cols[k])[r])) {
        ++report.per_rule[k].rows_dropped;
        drop = true;
      }
    }
    if (!drop) kept.push_back(static_cast<std::uint32_t>(r));
  }
  report.rows_kept = kept.size();
  report.rows_dropped_total = d.n_rows - kept.size();
  return {take_rows(d, kept), report};
}

// ---------------------------------------------------------------------------
// Imputation

namespace detail {

inline std::string unique_sentinel_label(const std::vector<std::string>& labels) {
  std::string candidate = "missing";
  while (std::find(labels.begin(), labels.end(), candidate) != labels.end()) {
    candidate += "_";
  }
  return candidate;
}

}  // namespace detail

struct ImputeSummary {
  std::map<std::string, std::size_t> imputed_cells;  // column -> count
  std::map<std::string, double> continuous_means;    // only columns that had missing
};

// Continuous missing -> mean over observed values; categorical missing -> a
// dedicated category appended to the vocabulary. After this no column carries
// a missing marker.
inline std::pair<Dataset, ImputeSummary> impute_with_summary(const Dataset& d) {
  Dataset out = d;
  ImputeSummary summary;
  for (std::size_t f = 0; f < out.schema.size(); ++f) {
    const auto& sc = out.schema[f];
    if (sc.kind == ColumnKind::continuous) {
      auto& col = std::get<std::vector<double>>(out.columns[f]);
      double sum = 0.0;
      std::size_t observed = 0, missing = 0;
      for (const double v : col) {
        if (std::isnan(v)) {
          ++missing;
        } else {
          sum += v;
          ++observed;
        }
      }
      if (missing == 0) continue;
      if (observed == 0) {
        throw ValueError("column '" + sc.name + "' is entirely missing; no mean to impute");
      }
      const double mean = sum / static_cast<double>(observed);
      for (double& v : col) {
        if (std::isnan(v)) v = mean;
      }
      summary.imputed_cells[sc.name] = missing;
      summary.continuous_means[sc.name] = mean;
    } else {
      auto& col = std::get<CategoricalColumn>(out.columns[f]);
      std::size_t missing = 0;
      for (const std::int32_t c : col.codes) {
        if (c == kMissingCode) ++missing;
      }
      if (missing == 0) continue;
      const auto sentinel = static_cast<std::int32_t>(col.labels.size());
      col.labels.push_back(detail::unique_sentinel_label(col.labels));
      col.sentinel_code = sentinel;
      for (std::int32_t& c : col.codes) {
        if (c == kMissingCode) c = sentinel;
      }
      summary.imputed_cells[sc.name] = missing;
    }
  }
  return {std::move(out), std::move(summary)};
}

inline Dataset impute(const Dataset& d) { return impute_with_summary(d).first; }

inline bool has_missing(const Dataset& d) {
  for (std::size_t f = 0; f < d.schema.size(); ++f) {
    if (d.schema[f].kind == ColumnKind::continuous) {
      for (const double v : d.continuous_col(f)) {
        if (std::isnan(v)) return true;
      }
    } else {
      for (const std::int32_t c : d.categorical_col(f).codes) {
        if (c == kMissingCode) return true;
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Row selection and export

// Row subset in the given order; vocabularies are carried over unchanged so
// category codes keep their meaning across subsets.
inline Dataset take_rows(const Dataset& d, const std::vector<std::uint32_t>& rows) {
  for (const auto r : rows) {
    if (r >= d.n_rows) throw ValueError("take_rows: row index out of range");
  }
  Dataset out;
  out.schema = d.schema;
  out.n_rows = rows.size();
  out.columns.reserve(d.columns.size());
  for (std::size_t f = 0; f < d.columns.size(); ++f) {
    if (d.schema[f].kind == ColumnKind::continuous) {
      const auto& src = std::get<std::vector<double>>(d.columns[f]);
      std::vector<double> col;
      col.reserve(rows.size());
      for (const auto r : rows) col.push_back(src[r]);
      out.columns.emplace_back(std::move(col));
    } else {
      const auto& src = std::get<CategoricalColumn>(d.columns[f]);
      CategoricalColumn col;
      col.labels = src.labels;
      col.sentinel_code = src.sentinel_code;
      col.codes.reserve(rows.size());
      for (const auto r : rows) col.codes.push_back(src.codes[r]);
      out.columns.emplace_back(std::move(col));
    }
  }
  out.labels.reserve(rows.size());
  for (const auto r : rows) out.labels.push_back(d.labels[r]);
  if (d.has_groups()) {
    out.group_ids.reserve(rows.size());
    for (const auto r : rows) out.group_ids.push_back(d.group_ids[r]);
  }
  return out;
}

// Writes features in schema order, then the label, then the group column if
// present. Missing continuous cells become empty; missing categorical codes
// become empty.
inline void write_csv(const Dataset& d, std::ostream& out, const std::string& label_column,
                      const std::string& group_column = "", char delimiter = ',') {
  for (std::size_t f = 0; f < d.schema.size(); ++f) {
    if (f > 0) out << delimiter;
    out << d.schema[f].name;
  }
  out << delimiter << label_column;
  if (!group_column.empty()) {
    if (!d.has_groups()) throw SchemaError("write_csv: dataset has no group ids");
    out << delimiter << group_column;
  }
  out << '\n';
  for (std::size_t r = 0; r < d.n_rows; ++r) {
    for (std::size_t f = 0; f < d.schema.size(); ++f) {
      if (f > 0) out << delimiter;
      if (d.schema[f].kind == ColumnKind::continuous) {
        const double v = std::get<std::vector<double>>(d.columns[f])[r];
        if (!std::isnan(v)) out << fmt_double(v);
      } else {
        const auto& col = std::get<CategoricalColumn>(d.columns[f]);
        if (col.codes[r] != kMissingCode) out << col.labels[col.codes[r]];
      }
    }
    out << delimiter << d.labels[r];
    if (!group_column.empty()) out << delimiter << d.group_ids[r];
    out << '\n';
  }
}

inline void write_csv_file(const Dataset& d, const std::string& path,
                           const std::string& label_column, const std::string& group_column = "",
                           char delimiter = ',') {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for write: " + path);
  write_csv(d, out, label_column, group_column, delimiter);
}

}  // namespace glassgam
