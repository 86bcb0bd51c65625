/*
 * Copyright 2026 The Tweedie Conformal Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TWEEDIE_CONFORMAL_DATASET_HPP_
#define TWEEDIE_CONFORMAL_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "tweedie_conformal/csv.hpp"
#include "tweedie_conformal/errors.hpp"

namespace tweedie_conformal::data {

enum class ColumnRole { numeric, categorical, ignore };

inline std::string to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::numeric: return "numeric";
    case ColumnRole::categorical: return "categorical";
    case ColumnRole::ignore: return "ignore";
  }
  return "?";
}

inline ColumnRole parse_role(const std::string& s) {
  if (s == "numeric") return ColumnRole::numeric;
  if (s == "categorical") return ColumnRole::categorical;
  if (s == "ignore") return ColumnRole::ignore;
  throw DataError("unknown column role '" + s + "'");
}

// More levels than this in one categorical column is refused.
inline constexpr std::size_t kMaxCategoryLevels = 1024;

// Code stored for a categorical level that the column metadata does not know.
inline constexpr double kUnseenLevel = -1.0;

struct Schema {
  std::string target;
  // Columns absent from the map have their role inferred: numeric when every
  // non-missing cell parses as a number, categorical otherwise.
  std::map<std::string, ColumnRole> roles;
  std::map<std::string, std::vector<std::string>> levels;
  bool allow_missing = false;

  static Schema from_json(const nlohmann::json& j) {
    Schema s;
    if (!j.contains("target") || !j["target"].is_string()) {
      throw DataError("schema needs a string 'target'");
    }
    s.target = j["target"].get<std::string>();
    if (j.contains("columns")) {
      for (auto& [name, role] : j["columns"].items()) {
        s.roles[name] = parse_role(role.get<std::string>());
      }
    }
    if (j.contains("levels")) {
      for (auto& [name, lv] : j["levels"].items()) {
        s.levels[name] = lv.get<std::vector<std::string>>();
      }
    }
    if (j.contains("allow_missing")) s.allow_missing = j["allow_missing"].get<bool>();
    if (s.roles.count(s.target) && s.roles.at(s.target) != ColumnRole::numeric) {
      throw DataError("target column '" + s.target + "' must be numeric");
    }
    return s;
  }

  static Schema load(const std::string& path) {
    try {
      return from_json(nlohmann::json::parse(csv::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("schema '" + path + "': " + e.what());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["target"] = target;
    nlohmann::json cols = nlohmann::json::object();
    for (const auto& [name, role] : roles) cols[name] = to_string(role);
    j["columns"] = cols;
    if (!levels.empty()) j["levels"] = levels;
    j["allow_missing"] = allow_missing;
    return j;
  }

  // Column roles of the AutoClaim insurance table: CLM_AMT5 is the target,
  // POLICYNO, PLCYDATE, CLM_FREQ5 and CLM_AMT are dropped.
  static Schema autoclaim() {
    Schema s;
    s.target = "CLM_AMT5";
    for (const char* c : {"POLICYNO", "PLCYDATE", "CLM_FREQ5", "CLM_AMT"}) {
      s.roles[c] = ColumnRole::ignore;
    }
    for (const char* c : {"KIDSDRIV", "TRAVTIME", "BLUEBOOK", "RETAINED",
                          "NPOLICY", "MVR_PTS", "AGE", "HOMEKIDS", "YOJ",
                          "INCOME", "HOME_VAL", "SAMEHOME"}) {
      s.roles[c] = ColumnRole::numeric;
    }
    for (const char* c : {"CAR_USE", "CAR_TYPE", "RED_CAR", "REVOLKED",
                          "CLM_FLAG", "GENDER", "MARRIED", "PARENT1",
                          "JOBCLASS", "MAX_EDUC", "AREA"}) {
      s.roles[c] = ColumnRole::categorical;
    }
    s.roles["CLM_AMT5"] = ColumnRole::numeric;
    return s;
  }
};

enum class FeatureKind { numeric, categorical };

struct FeatureInfo {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> levels;  // categorical only; code = index

  bool operator==(const FeatureInfo&) const = default;
};

inline nlohmann::json features_to_json(const std::vector<FeatureInfo>& fs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fs) {
    nlohmann::json j;
    j["name"] = f.name;
    j["kind"] = f.kind == FeatureKind::numeric ? "numeric" : "categorical";
    if (f.kind == FeatureKind::categorical) j["levels"] = f.levels;
    arr.push_back(j);
  }
  return arr;
}

inline std::vector<FeatureInfo> features_from_json(const nlohmann::json& arr) {
  std::vector<FeatureInfo> fs;
  for (const auto& j : arr) {
    FeatureInfo f;
    f.name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "numeric") {
      f.kind = FeatureKind::numeric;
    } else if (kind == "categorical") {
      f.kind = FeatureKind::categorical;
      f.levels = j.at("levels").get<std::vector<std::string>>();
    } else {
      throw DataError("unknown feature kind '" + kind + "'");
    }
    fs.push_back(std::move(f));
  }
  return fs;
}

inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Feature columns (column-major, categorical levels stored as integer codes in
// doubles, NaN for an allowed missing numeric) plus a nonnegative target.
// Every row keeps the id it had in the source it was loaded or generated
// from, so models can record which rows they were trained on.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<FeatureInfo> features,
          std::vector<std::vector<double>> columns, std::vector<double> target,
          std::uint64_t source_id = 0, std::vector<std::uint64_t> row_ids = {})
      : features_(std::move(features)),
        columns_(std::move(columns)),
        target_(std::move(target)),
        row_ids_(std::move(row_ids)),
        source_id_(source_id) {
    if (columns_.size() != features_.size()) {
      throw DataError("feature metadata and column count differ");
    }
    rows_ = target_.size();
    for (const auto& c : columns_) {
      if (c.size() != rows_) throw DataError("ragged feature columns");
    }
    if (row_ids_.empty()) {
      row_ids_.resize(rows_);
      for (std::size_t i = 0; i < rows_; ++i) row_ids_[i] = i;
    }
    if (row_ids_.size() != rows_) throw DataError("row id count mismatch");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!(target_[i] >= 0.0) || !std::isfinite(target_[i])) {
        std::ostringstream os;
        os << "target at row " << i << " is not a finite nonnegative number";
        throw DataError(os.str());
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t num_features() const { return features_.size(); }
  const std::vector<FeatureInfo>& features() const { return features_; }
  const FeatureInfo& feature(std::size_t j) const { return features_[j]; }
  std::span<const double> column(std::size_t j) const { return columns_[j]; }
  double value(std::size_t i, std::size_t j) const { return columns_[j][i]; }
  std::span<const double> target() const { return target_; }
  const std::vector<std::uint64_t>& row_ids() const { return row_ids_; }
  std::uint64_t source_id() const { return source_id_; }

  std::vector<double> row(std::size_t i) const {
    std::vector<double> r(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) r[j] = columns_[j][i];
    return r;
  }

  std::optional<std::size_t> feature_index(std::string_view name) const {
    for (std::size_t j = 0; j < features_.size(); ++j) {
      if (features_[j].name == name) return j;
    }
    return std::nullopt;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<std::vector<double>> cols(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      cols[j].reserve(indices.size());
      for (std::size_t i : indices) cols[j].push_back(columns_[j].at(i));
    }
    std::vector<double> y;
    std::vector<std::uint64_t> ids;
    y.reserve(indices.size());
    ids.reserve(indices.size());
    for (std::size_t i : indices) {
      y.push_back(target_.at(i));
      ids.push_back(row_ids_.at(i));
    }
    return Dataset(features_, std::move(cols), std::move(y), source_id_,
                   std::move(ids));
  }

  Dataset with_target(std::vector<double> target) const {
    if (target.size() != rows_) throw DataError("replacement target has wrong length");
    return Dataset(features_, columns_, std::move(target), source_id_, row_ids_);
  }

  // Re-expresses this dataset in the column layout and level coding of
  // `reference`, matching columns by name. Levels unknown to the reference
  // are coded kUnseenLevel. Missing columns are a data error.
  Dataset aligned_to(const std::vector<FeatureInfo>& reference) const {
    std::vector<std::vector<double>> cols;
    cols.reserve(reference.size());
    for (const auto& ref : reference) {
      const auto idx = feature_index(ref.name);
      if (!idx) throw DataError("input lacks feature column '" + ref.name + "'");
      const FeatureInfo& mine = features_[*idx];
      if (mine.kind != ref.kind) {
        throw DataError("feature '" + ref.name + "' has a different kind than at training");
      }
      std::vector<double> col = columns_[*idx];
      if (ref.kind == FeatureKind::categorical) {
        std::unordered_map<std::string, double> code;
        for (std::size_t l = 0; l < ref.levels.size(); ++l) {
          code[ref.levels[l]] = static_cast<double>(l);
        }
        for (double& v : col) {
          if (v < 0.0 || v >= static_cast<double>(mine.levels.size())) {
            v = kUnseenLevel;
            continue;
          }
          auto it = code.find(mine.levels[static_cast<std::size_t>(v)]);
          v = it == code.end() ? kUnseenLevel : it->second;
        }
      }
      cols.push_back(std::move(col));
    }
    return Dataset(reference, std::move(cols), target_, source_id_, row_ids_);
  }

 private:
  std::vector<FeatureInfo> features_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> target_;
  std::vector<std::uint64_t> row_ids_;
  std::uint64_t source_id_ = 0;
  std::size_t rows_ = 0;
};

struct LoadOptions {
  // Query files for interval prediction may omit the target column; rows
  // then get target 0.
  bool target_optional = false;
};

namespace internal {
inline std::string list_rows(const std::vector<std::size_t>& lines) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(lines.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << lines[i];
  if (lines.size() > shown) os << ", ... (" << lines.size() << " total)";
  return os.str();
}
}  // namespace internal

inline Dataset from_table(const csv::Table& table, const Schema& schema,
                          std::uint64_t source_id,
                          const LoadOptions& options = {}) {
  const std::size_t n = table.rows.size();
  const auto& header = table.header;
  std::optional<std::size_t> target_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == schema.target) target_col = c;
  }
  if (!target_col && !options.target_optional) {
    throw DataError("target column '" + schema.target + "' not found in header");
  }
  std::vector<std::size_t> bad_width;
  for (std::size_t r = 0; r < n; ++r) {
    if (table.rows[r].size() != header.size()) bad_width.push_back(table.line_numbers[r]);
  }
  if (!bad_width.empty()) {
    throw DataError("malformed rows (field count differs from header) on lines " +
                    internal::list_rows(bad_width));
  }

  std::vector<double> target(n, 0.0);
  if (target_col) {
    std::vector<std::size_t> bad;
    for (std::size_t r = 0; r < n; ++r) {
      const auto v = csv::parse_double(table.rows[r][*target_col]);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        bad.push_back(table.line_numbers[r]);
      } else {
        target[r] = *v;
      }
    }
    if (!bad.empty()) {
      throw DataError("target '" + schema.target +
                      "' is missing, non-numeric, non-finite or negative on lines " +
                      internal::list_rows(bad));
    }
  }

  std::vector<FeatureInfo> features;
  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (target_col && c == *target_col) continue;
    const std::string& name = header[c];
    ColumnRole role;
    if (auto it = schema.roles.find(name); it != schema.roles.end()) {
      role = it->second;
    } else {
      role = ColumnRole::numeric;
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = table.rows[r][c];
        if (!csv::is_missing_token(cell) && !csv::parse_double(cell)) {
          role = ColumnRole::categorical;
          break;
        }
      }
    }
    if (role == ColumnRole::ignore) continue;

    FeatureInfo info;
    info.name = name;
    std::vector<double> col(n);
    if (role == ColumnRole::numeric) {
      info.kind = FeatureKind::numeric;
      std::vector<std::size_t> missing;
      std::vector<std::size_t> bad;
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = table.rows[r][c];
        if (csv::is_missing_token(cell)) {
          missing.push_back(table.line_numbers[r]);
          col[r] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const auto v = csv::parse_double(cell);
        if (!v || !std::isfinite(*v)) {
          bad.push_back(table.line_numbers[r]);
        } else {
          col[r] = *v;
        }
      }
      if (!bad.empty()) {
        throw DataError("column '" + name + "' has non-numeric values on lines " +
                        internal::list_rows(bad));
      }
      if (!missing.empty() && !schema.allow_missing) {
        throw DataError("column '" + name + "' has missing values on lines " +
                        internal::list_rows(missing) +
                        " (set allow_missing in the schema to impute)");
      }
    } else {
      info.kind = FeatureKind::categorical;
      std::vector<std::string> levels;
      if (auto it = schema.levels.find(name); it != schema.levels.end()) {
        levels = it->second;
      }
      std::set<std::string> extra;
      std::set<std::string> declared(levels.begin(), levels.end());
      for (std::size_t r = 0; r < n; ++r) {
        std::string cell = table.rows[r][c];
        if (cell.empty()) cell = "NA";
        if (!declared.count(cell)) extra.insert(cell);
      }
      levels.insert(levels.end(), extra.begin(), extra.end());
      if (levels.size() > kMaxCategoryLevels) {
        std::ostringstream os;
        os << "column '" << name << "' has " << levels.size()
           << " categorical levels (limit " << kMaxCategoryLevels
           << "); declare it numeric or ignore in the schema";
        throw DataError(os.str());
      }
      std::unordered_map<std::string, double> code;
      for (std::size_t l = 0; l < levels.size(); ++l) {
        code[levels[l]] = static_cast<double>(l);
      }
      for (std::size_t r = 0; r < n; ++r) {
        std::string cell = table.rows[r][c];
        if (cell.empty()) cell = "NA";
        col[r] = code.at(cell);
      }
      info.levels = std::move(levels);
    }
    features.push_back(std::move(info));
    columns.push_back(std::move(col));
  }
  return Dataset(std::move(features), std::move(columns), std::move(target),
                 source_id);
}

inline Dataset load_csv(const std::string& path, const Schema& schema,
                        const LoadOptions& options = {}) {
  const std::string text = csv::read_file(path);
  return from_table(csv::parse(text), schema, fnv1a(text), options);
}

inline std::string to_csv(const Dataset& ds, const std::string& target_name) {
  std::ostringstream os;
  std::vector<std::string> header;
  for (const auto& f : ds.features()) header.push_back(f.name);
  header.push_back(target_name);
  os << csv::join(header) << "\n";
  std::vector<std::string> fields(header.size());
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.num_features(); ++j) {
      const double v = ds.value(i, j);
      const auto& f = ds.feature(j);
      if (f.kind == FeatureKind::numeric) {
        fields[j] = csv::format_double(v);
      } else {
        fields[j] = v >= 0.0 ? f.levels[static_cast<std::size_t>(v)] : std::string("NA");
      }
    }
    fields.back() = csv::format_double(ds.target()[i]);
    os << csv::join(fields) << "\n";
  }
  return os.str();
}

inline void write_csv(const Dataset& ds, const std::string& path,
                      const std::string& target_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << to_csv(ds, target_name);
}

}  // namespace tweedie_conformal::data

#endif  // TWEEDIE_CONFORMAL_DATASET_HPP_
