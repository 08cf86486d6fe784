#ifndef MFPB_DATA_HPP
#define MFPB_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "mfpb/errors.hpp"

namespace mfpb {

enum class ColumnKind { numeric, categorical };
enum class MissingPolicy { error, drop_row };

struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
};

/// Binarizes one column: rows whose raw value is in `protected_values` form
/// the protected group, every other row the non-protected group.
struct ProtectedSpec {
  std::string column;
  std::set<std::string> protected_values;
};

struct DatasetSchema {
  std::string label_column;
  std::string positive_label;
  std::vector<ProtectedSpec> protected_specs;
  std::vector<FeatureColumn> feature_columns;
  MissingPolicy missing_policy = MissingPolicy::error;

  // Throws SchemaError when an invariant is broken.
  void validate() const {
    if (label_column.empty()) throw SchemaError("data", "label_column is empty");
    if (protected_specs.empty()) throw SchemaError("data", "at least one protected attribute is required");
    std::set<std::string> seen;
    for (const auto& p : protected_specs) {
      if (p.column == label_column)
        throw SchemaError("data", "label column '" + label_column + "' cannot be protected");
      if (!seen.insert(p.column).second)
        throw SchemaError("data", "protected column '" + p.column + "' listed twice");
      if (p.protected_values.empty())
        throw SchemaError("data", "protected column '" + p.column + "' has no protected_values");
    }
    for (const auto& f : feature_columns) {
      if (f.name == label_column)
        throw SchemaError("data", "label column '" + label_column + "' cannot be a feature");
    }
  }
};

inline DatasetSchema schema_from_json(const nlohmann::json& doc) {
  auto require = [&](const nlohmann::json& node, const char* key, const std::string& path) -> const nlohmann::json& {
    if (!node.is_object() || !node.contains(key))
      throw ParseError("data", path, std::string("missing key '") + key + "'");
    return node.at(key);
  };
  auto as_string = [](const nlohmann::json& node, const std::string& path) {
    if (!node.is_string()) throw ParseError("data", path, "expected a string");
    return node.get<std::string>();
  };

  DatasetSchema schema;
  schema.label_column = as_string(require(doc, "label_column", ""), "/label_column");
  schema.positive_label = as_string(require(doc, "positive_label", ""), "/positive_label");

  const auto& prot = require(doc, "protected", "");
  if (!prot.is_array()) throw ParseError("data", "/protected", "expected an array");
  for (std::size_t i = 0; i < prot.size(); ++i) {
    const std::string base = "/protected/" + std::to_string(i);
    ProtectedSpec spec;
    spec.column = as_string(require(prot[i], "column", base), base + "/column");
    const auto& values = require(prot[i], "protected_values", base);
    if (!values.is_array()) throw ParseError("data", base + "/protected_values", "expected an array");
    for (std::size_t v = 0; v < values.size(); ++v)
      spec.protected_values.insert(as_string(values[v], base + "/protected_values/" + std::to_string(v)));
    schema.protected_specs.push_back(std::move(spec));
  }

  if (doc.contains("features")) {
    const auto& feats = doc.at("features");
    if (!feats.is_array()) throw ParseError("data", "/features", "expected an array");
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const std::string base = "/features/" + std::to_string(i);
      FeatureColumn col;
      col.name = as_string(require(feats[i], "column", base), base + "/column");
      const auto kind = as_string(require(feats[i], "kind", base), base + "/kind");
      if (kind == "numeric") {
        col.kind = ColumnKind::numeric;
      } else if (kind == "categorical") {
        col.kind = ColumnKind::categorical;
      } else {
        throw ParseError("data", base + "/kind", "unknown kind '" + kind + "'");
      }
      schema.feature_columns.push_back(std::move(col));
    }
  }

  if (doc.contains("missing_policy")) {
    const auto policy = as_string(doc.at("missing_policy"), "/missing_policy");
    if (policy == "error") {
      schema.missing_policy = MissingPolicy::error;
    } else if (policy == "drop_row") {
      schema.missing_policy = MissingPolicy::drop_row;
    } else {
      throw ParseError("data", "/missing_policy", "unknown policy '" + policy + "'");
    }
  }
  schema.validate();
  return schema;
}

inline nlohmann::json schema_to_json(const DatasetSchema& schema) {
  nlohmann::json doc;
  doc["label_column"] = schema.label_column;
  doc["positive_label"] = schema.positive_label;
  doc["protected"] = nlohmann::json::array();
  for (const auto& p : schema.protected_specs) {
    doc["protected"].push_back({{"column", p.column},
                                {"protected_values", std::vector<std::string>(p.protected_values.begin(),
                                                                              p.protected_values.end())}});
  }
  doc["features"] = nlohmann::json::array();
  for (const auto& f : schema.feature_columns)
    doc["features"].push_back({{"column", f.name}, {"kind", f.kind == ColumnKind::numeric ? "numeric" : "categorical"}});
  doc["missing_policy"] = schema.missing_policy == MissingPolicy::error ? "error" : "drop_row";
  return doc;
}

inline DatasetSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("data", "cannot open schema file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("data", "", "schema '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(doc);
}

/// Cardinalities of the four group x class cells of one protected attribute.
struct GroupCounts {
  std::size_t protected_pos = 0;
  std::size_t unprotected_pos = 0;
  std::size_t protected_neg = 0;
  std::size_t unprotected_neg = 0;

  friend bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

/// Immutable encoded dataset: row-major features, labels in {+1,-1} and one
/// membership mask per protected attribute (1 = protected group).
class Dataset {
 public:
  Dataset() = default;

  static Dataset create(std::vector<double> features, std::size_t dims, std::vector<int> labels,
                        std::vector<std::vector<std::uint8_t>> masks,
                        std::vector<std::string> feature_names = {},
                        std::vector<std::string> attribute_names = {}) {
    const std::size_t n = labels.size();
    if (features.size() != n * dims)
      throw ArgumentError("data", "feature matrix has " + std::to_string(features.size()) + " entries, expected " +
                                      std::to_string(n * dims));
    for (int y : labels)
      if (y != 1 && y != -1) throw ArgumentError("data", "labels must be +1 or -1");
    for (const auto& m : masks)
      if (m.size() != n) throw ArgumentError("data", "group mask length differs from instance count");
    if (feature_names.empty())
      for (std::size_t f = 0; f < dims; ++f) feature_names.push_back("x" + std::to_string(f));
    if (attribute_names.empty())
      for (std::size_t j = 0; j < masks.size(); ++j) attribute_names.push_back("S" + std::to_string(j + 1));
    if (feature_names.size() != dims) throw ArgumentError("data", "feature name count differs from dims");
    if (attribute_names.size() != masks.size())
      throw ArgumentError("data", "attribute name count differs from mask count");

    Dataset ds;
    ds.features_ = std::move(features);
    ds.dims_ = dims;
    ds.labels_ = std::move(labels);
    ds.masks_ = std::move(masks);
    ds.feature_names_ = std::move(feature_names);
    ds.attribute_names_ = std::move(attribute_names);
    ds.counts_.reserve(ds.masks_.size());
    for (std::size_t j = 0; j < ds.masks_.size(); ++j) ds.counts_.push_back(ds.recount(j));
    return ds;
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t attributes() const noexcept { return masks_.size(); }

  std::span<const double> row(std::size_t i) const { return {features_.data() + i * dims_, dims_}; }
  double feature(std::size_t i, std::size_t f) const { return features_[i * dims_ + f]; }
  std::span<const double> features() const noexcept { return features_; }
  std::span<const int> labels() const noexcept { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const std::uint8_t> mask(std::size_t j) const { return masks_.at(j); }
  bool in_protected(std::size_t j, std::size_t i) const { return masks_[j][i] != 0; }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }

  const GroupCounts& counts(std::size_t j) const { return counts_.at(j); }

  // Counts derived from the masks and labels, independent of the cache.
  GroupCounts recount(std::size_t j) const {
    GroupCounts c;
    const auto& m = masks_.at(j);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const bool s = m[i] != 0;
      if (labels_[i] == 1) {
        ++(s ? c.protected_pos : c.unprotected_pos);
      } else {
        ++(s ? c.protected_neg : c.unprotected_neg);
      }
    }
    return c;
  }

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
  }
  std::size_t negatives() const { return size() - positives(); }

  // Minority-to-majority class size ratio.
  double imbalance_ratio() const {
    const double p = static_cast<double>(positives());
    const double q = static_cast<double>(negatives());
    if (p == 0.0 || q == 0.0) return 0.0;
    return std::min(p, q) / std::max(p, q);
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<double> feats;
    feats.reserve(indices.size() * dims_);
    std::vector<int> labels;
    labels.reserve(indices.size());
    std::vector<std::vector<std::uint8_t>> masks(masks_.size());
    for (std::size_t i : indices) {
      if (i >= size()) throw ArgumentError("data", "subset index out of range");
      auto r = row(i);
      feats.insert(feats.end(), r.begin(), r.end());
      labels.push_back(labels_[i]);
      for (std::size_t j = 0; j < masks_.size(); ++j) masks[j].push_back(masks_[j][i]);
    }
    return create(std::move(feats), dims_, std::move(labels), std::move(masks), feature_names_, attribute_names_);
  }

 private:
  std::vector<double> features_;
  std::size_t dims_ = 0;
  std::vector<int> labels_;
  std::vector<std::vector<std::uint8_t>> masks_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> attribute_names_;
  std::vector<GroupCounts> counts_;
};

inline void require_both_classes(const Dataset& ds, const std::string& module) {
  if (ds.positives() == 0) throw DegenerateDataError(module, "dataset has no positive (+1) instances");
  if (ds.negatives() == 0) throw DegenerateDataError(module, "dataset has no negative (-1) instances");
}

namespace csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// line breaks. A trailing CR before LF is dropped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<Record> next() {
    Record rec;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool field_was_quoted = false;
    rec.line = line_;
    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      const char c = static_cast<char>(ch);
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && field.empty() && !field_was_quoted) {
        in_quotes = true;
        field_was_quoted = true;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (c == '\n') {
        ++line_;
        if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
        rec.fields.push_back(std::move(field));
        return rec;
      } else {
        field.push_back(c);
      }
    }
    if (in_quotes) throw RowError("data", rec.line, "unterminated quoted field");
    if (!any) return std::nullopt;
    if (!field.empty() && field.back() == '\r' && !field_was_quoted) field.pop_back();
    rec.fields.push_back(std::move(field));
    return rec;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

struct LoadOptions {
  // Placeholders treated as missing in addition to the empty string.
  std::vector<std::string> missing_tokens{"?", "NA"};
};

inline Dataset load_csv(std::istream& in, const DatasetSchema& schema, const LoadOptions& options = {}) {
  schema.validate();
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("data", "CSV input is empty");

  std::unordered_map<std::string, std::size_t> column_index;
  for (std::size_t c = 0; c < header->fields.size(); ++c) column_index[csv::trim(header->fields[c])] = c;
  auto locate = [&](const std::string& name) {
    auto it = column_index.find(name);
    if (it == column_index.end()) throw SchemaError("data", "missing column '" + name + "' in CSV header");
    return it->second;
  };

  const std::size_t label_col = locate(schema.label_column);
  std::vector<std::size_t> protected_cols;
  for (const auto& p : schema.protected_specs) protected_cols.push_back(locate(p.column));
  std::vector<std::size_t> feature_cols;
  for (const auto& f : schema.feature_columns) feature_cols.push_back(locate(f.name));

  auto is_missing = [&](const std::string& v) {
    return v.empty() || std::find(options.missing_tokens.begin(), options.missing_tokens.end(), v) !=
                            options.missing_tokens.end();
  };

  // First pass: validated raw rows.
  struct RawRow {
    int label;
    std::vector<std::string> values;  // one per feature column
    std::vector<std::uint8_t> groups;
  };
  std::vector<RawRow> rows;
  std::set<std::string> label_values;
  const bool drop = schema.missing_policy == MissingPolicy::drop_row;

  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && csv::trim(rec->fields[0]).empty()) continue;  // blank line
    auto reject = [&](const std::string& why) {
      if (!drop) throw RowError("data", rec->line, why);
    };
    if (rec->fields.size() != header->fields.size()) {
      reject("expected " + std::to_string(header->fields.size()) + " fields, found " +
             std::to_string(rec->fields.size()));
      continue;
    }
    RawRow row;
    const std::string label = csv::trim(rec->fields[label_col]);
    if (is_missing(label)) {
      reject("missing label");
      continue;
    }
    if (label != schema.positive_label && !label_values.contains(label)) {
      std::size_t negatives = 0;
      for (const auto& v : label_values) negatives += v != schema.positive_label;
      if (negatives >= 1) {
        reject("label '" + label + "' is neither '" + schema.positive_label + "' nor the negative value already seen");
        continue;
      }
    }
    label_values.insert(label);
    row.label = label == schema.positive_label ? 1 : -1;

    bool ok = true;
    for (std::size_t j = 0; j < protected_cols.size() && ok; ++j) {
      const std::string v = csv::trim(rec->fields[protected_cols[j]]);
      if (is_missing(v)) {
        reject("missing value in protected column '" + schema.protected_specs[j].column + "'");
        ok = false;
        break;
      }
      row.groups.push_back(schema.protected_specs[j].protected_values.contains(v) ? 1 : 0);
    }
    if (!ok) continue;

    for (std::size_t f = 0; f < feature_cols.size() && ok; ++f) {
      std::string v = csv::trim(rec->fields[feature_cols[f]]);
      if (is_missing(v)) {
        reject("missing value in column '" + schema.feature_columns[f].name + "'");
        ok = false;
        break;
      }
      if (schema.feature_columns[f].kind == ColumnKind::numeric) {
        std::size_t used = 0;
        double parsed = 0.0;
        try {
          parsed = std::stod(v, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != v.size() || !std::isfinite(parsed)) {
          reject("cannot parse '" + v + "' as a number in column '" + schema.feature_columns[f].name + "'");
          ok = false;
          break;
        }
      }
      row.values.push_back(std::move(v));
    }
    if (!ok) continue;
    rows.push_back(std::move(row));
  }

  // Second pass: encode. Categorical levels are ordered lexicographically.
  std::vector<std::vector<std::string>> levels(feature_cols.size());
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    if (schema.feature_columns[f].kind != ColumnKind::categorical) continue;
    std::set<std::string> seen;
    for (const auto& r : rows) seen.insert(r.values[f]);
    levels[f].assign(seen.begin(), seen.end());
  }
  std::vector<std::string> names;
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const auto& col = schema.feature_columns[f];
    if (col.kind == ColumnKind::numeric) {
      names.push_back(col.name);
    } else {
      for (const auto& lvl : levels[f]) names.push_back(col.name + "=" + lvl);
    }
  }
  const std::size_t dims = names.size();
  std::vector<double> features;
  features.reserve(rows.size() * dims);
  std::vector<int> labels;
  labels.reserve(rows.size());
  std::vector<std::vector<std::uint8_t>> masks(protected_cols.size());
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      if (schema.feature_columns[f].kind == ColumnKind::numeric) {
        features.push_back(std::stod(r.values[f]));
      } else {
        for (const auto& lvl : levels[f]) features.push_back(r.values[f] == lvl ? 1.0 : 0.0);
      }
    }
    labels.push_back(r.label);
    for (std::size_t j = 0; j < masks.size(); ++j) masks[j].push_back(r.groups[j]);
  }
  std::vector<std::string> attributes;
  for (const auto& p : schema.protected_specs) attributes.push_back(p.column);

  auto ds = Dataset::create(std::move(features), dims, std::move(labels), std::move(masks), std::move(names),
                            std::move(attributes));
  require_both_classes(ds, "data");
  return ds;
}

inline Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema,
                        const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("data", "cannot open data file '" + path.string() + "'");
  return load_csv(in, schema, options);
}

/// Writes an encoded dataset back as CSV with columns
/// `label,<attribute>...,<feature>...`; labels are written as "pos"/"neg" and
/// group membership as "1"/"0". `schema_for_csv` returns the matching schema.
inline void write_csv(std::ostream& out, const Dataset& ds) {
  out << "label";
  for (const auto& a : ds.attribute_names()) out << ',' << csv::quote(a);
  for (const auto& f : ds.feature_names()) out << ',' << csv::quote(f);
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << (ds.label(i) == 1 ? "pos" : "neg");
    for (std::size_t j = 0; j < ds.attributes(); ++j) out << ',' << (ds.in_protected(j, i) ? '1' : '0');
    for (double v : ds.row(i)) out << ',' << v;
    out << '\n';
  }
}

inline DatasetSchema schema_for_csv(const Dataset& ds) {
  DatasetSchema schema;
  schema.label_column = "label";
  schema.positive_label = "pos";
  for (const auto& a : ds.attribute_names()) schema.protected_specs.push_back({a, {"1"}});
  for (const auto& f : ds.feature_names()) schema.feature_columns.push_back({f, ColumnKind::numeric});
  return schema;
}

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  bool stratified = true;
  std::string warning;  // non-empty when stratification was abandoned
};

/// Deterministic, class-stratified partition. `test_fraction` of every class
/// goes to the test part (at least one instance of each class per part when
/// the class has two or more instances). If some class has fewer than two
/// instances the split falls back to an unstratified shuffle and records a
/// warning.
inline SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ArgumentError("data", "test_fraction must lie in (0,1)");
  const std::size_t n = ds.size();
  if (n < 2) throw ArgumentError("data", "cannot split fewer than two instances");

  std::mt19937_64 rng(seed);
  auto take = [&](std::size_t count) {
    auto k = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(count)));
    return std::clamp<std::size_t>(k, 1, count - 1);
  };

  SplitResult out;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (ds.label(i) == 1 ? pos : neg).push_back(i);

  if (pos.size() >= 2 && neg.size() >= 2) {
    for (auto* cls : {&pos, &neg}) {
      std::shuffle(cls->begin(), cls->end(), rng);
      const std::size_t k = take(cls->size());
      out.test_indices.insert(out.test_indices.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(k));
      out.train_indices.insert(out.train_indices.end(), cls->begin() + static_cast<std::ptrdiff_t>(k), cls->end());
    }
  } else {
    out.stratified = false;
    out.warning = "a class has fewer than two instances; using an unstratified split";
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t k = take(n);
    out.test_indices.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    out.train_indices.assign(all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  out.train = ds.subset(out.train_indices);
  out.test = ds.subset(out.test_indices);
  return out;
}

}  // namespace mfpb

#endif  // MFPB_DATA_HPP
