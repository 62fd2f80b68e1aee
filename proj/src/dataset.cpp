#include "mqrif/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mqrif/errors.hpp"

namespace mqrif {

namespace {

// Parse one RFC-4180 record starting at *pos; advances *pos past the
// record terminator.  Returns false at end of input.
bool next_record(const std::string& text, std::size_t* pos,
                 std::vector<std::string>* fields) {
  fields->clear();
  std::size_t i = *pos;
  const std::size_t n = text.size();
  if (i >= n) return false;
  std::string field;
  bool quoted = false;
  for (;;) {
    if (i >= n) {
      fields->push_back(field);
      *pos = i;
      return true;
    }
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field.push_back(ch);
        ++i;
      }
      continue;
    }
    if (ch == '"' && field.empty()) {
      quoted = true;
      ++i;
    } else if (ch == ',') {
      fields->push_back(field);
      field.clear();
      ++i;
    } else if (ch == '\r' || ch == '\n') {
      fields->push_back(field);
      if (ch == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
      *pos = i + 1;
      return true;
    } else {
      field.push_back(ch);
      ++i;
    }
  }
}

bool parse_double(const std::string& text, double* out) {
  const char* begin = text.c_str();
  char* end = nullptr;
  *out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0' && std::isfinite(*out);
}

}  // namespace

void DatasetSchema::validate() const {
  if (response_columns.empty())
    throw InvalidArgument("schema: at least one response column required");
  std::set<std::string> seen;
  for (const auto& name : response_columns)
    if (!seen.insert(name).second)
      throw InvalidArgument("schema: duplicate column '" + name + "'");
  for (const auto& name : covariate_columns)
    if (!seen.insert(name).second)
      throw InvalidArgument("schema: duplicate column '" + name + "'");
  for (const auto& [name, baseline] : categorical_baseline) {
    (void)baseline;
    if (std::find(covariate_columns.begin(), covariate_columns.end(), name) ==
        covariate_columns.end())
      throw InvalidArgument("schema: categorical '" + name +
                            "' is not a declared covariate");
  }
  for (const auto& name : log_transform) {
    const bool is_response =
        std::find(response_columns.begin(), response_columns.end(), name) !=
        response_columns.end();
    const bool is_covariate =
        std::find(covariate_columns.begin(), covariate_columns.end(), name) !=
        covariate_columns.end();
    if (!is_response && !is_covariate)
      throw InvalidArgument("schema: log_transform column '" + name +
                            "' is not declared");
    if (categorical_baseline.count(name))
      throw InvalidArgument("schema: cannot log-transform categorical '" +
                            name + "'");
  }
}

Dataset load_csv(const std::string& path, const DatasetSchema& schema) {
  schema.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_csv: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::size_t pos = 0;
  std::vector<std::string> header;
  if (!next_record(text, &pos, &header) || header.empty())
    throw DataError("load_csv: missing header row in '" + path + "'");

  std::map<std::string, int> col_index;
  for (std::size_t j = 0; j < header.size(); ++j)
    col_index.emplace(header[j], static_cast<int>(j));

  const auto require = [&](const std::string& name) {
    const auto it = col_index.find(name);
    if (it == col_index.end())
      throw DataError("load_csv: column '" + name + "' not found in '" + path +
                      "'");
    return it->second;
  };

  std::vector<int> resp_idx;
  for (const auto& name : schema.response_columns) resp_idx.push_back(require(name));
  std::vector<int> cov_idx;
  for (const auto& name : schema.covariate_columns) cov_idx.push_back(require(name));

  std::set<std::string> log_set(schema.log_transform.begin(),
                                schema.log_transform.end());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> record;
  long dropped = 0;
  long file_row = 1;  // header consumed
  while (next_record(text, &pos, &record)) {
    ++file_row;
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    if (record.size() != header.size())
      throw DataError("load_csv: row " + std::to_string(file_row) + " has " +
                      std::to_string(record.size()) + " fields, expected " +
                      std::to_string(header.size()));
    bool missing = false;
    for (int idx : resp_idx)
      if (record[static_cast<std::size_t>(idx)].empty()) missing = true;
    for (int idx : cov_idx)
      if (record[static_cast<std::size_t>(idx)].empty()) missing = true;
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(record);
  }

  Dataset out;
  out.schema = schema;
  out.response_names = schema.response_columns;
  out.n_dropped_missing = dropped;
  out.n_rows = static_cast<long>(rows.size());
  if (rows.empty()) throw DataError("load_csv: no usable rows in '" + path + "'");

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(resp_idx.size());
  out.y.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < p; ++l) {
      const std::string& cell =
          rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(resp_idx[static_cast<std::size_t>(l)])];
      double value = 0.0;
      if (!parse_double(cell, &value))
        throw DataError("load_csv: non-numeric response '" + cell +
                        "' in column '" + schema.response_columns[static_cast<std::size_t>(l)] +
                        "', data row " + std::to_string(i + 1));
      if (log_set.count(schema.response_columns[static_cast<std::size_t>(l)])) {
        if (!(value > 0.0))
          throw DataError("load_csv: log transform needs positive values; "
                          "column '" +
                          schema.response_columns[static_cast<std::size_t>(l)] +
                          "', data row " + std::to_string(i + 1));
        value = std::log(value);
      }
      out.y(i, l) = value;
    }
  }

  for (std::size_t jc = 0; jc < schema.covariate_columns.size(); ++jc) {
    const std::string& name = schema.covariate_columns[jc];
    Dataset::Column col;
    col.name = name;
    col.categorical = schema.categorical_baseline.count(name) > 0;
    const int idx = cov_idx[jc];
    if (col.categorical) {
      col.cat.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        col.cat.push_back(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx)]);
    } else {
      col.num.resize(n);
      for (int i = 0; i < n; ++i) {
        const std::string& cell =
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx)];
        double value = 0.0;
        if (!parse_double(cell, &value))
          throw DataError("load_csv: non-numeric value '" + cell +
                          "' in column '" + name + "', data row " +
                          std::to_string(i + 1));
        if (log_set.count(name)) {
          if (!(value > 0.0))
            throw DataError("load_csv: log transform needs positive values; "
                            "column '" +
                            name + "', data row " + std::to_string(i + 1));
          value = std::log(value);
        }
        col.num(i) = value;
      }
    }
    out.covariates.push_back(std::move(col));
  }
  return out;
}

Design encode_design(const Dataset& data, const DatasetSchema& schema) {
  schema.validate();
  const int n = static_cast<int>(data.n_rows);
  if (n < 1) throw DataError("encode_design: empty dataset");

  std::vector<Eigen::VectorXd> columns;
  std::vector<std::string> names;
  if (schema.add_intercept) {
    columns.push_back(Eigen::VectorXd::Ones(n));
    names.push_back("intercept");
  }

  for (const auto& col : data.covariates) {
    if (!col.categorical) {
      if (col.num.size() != n)
        throw DataError("encode_design: column length mismatch in '" + col.name + "'");
      columns.push_back(col.num);
      names.push_back(col.name);
      continue;
    }
    const auto it = schema.categorical_baseline.find(col.name);
    if (it == schema.categorical_baseline.end())
      throw DataError("encode_design: no baseline for categorical '" + col.name + "'");
    std::set<std::string> levels(col.cat.begin(), col.cat.end());
    if (!levels.count(it->second))
      throw DataError("encode_design: baseline level '" + it->second +
                      "' absent from column '" + col.name + "'");
    if (levels.size() < 2)
      throw DataError("encode_design: categorical '" + col.name +
                      "' has a single level");
    for (const auto& level : levels) {  // std::set iterates lexicographically
      if (level == it->second) continue;
      Eigen::VectorXd dummy(n);
      for (int i = 0; i < n; ++i)
        dummy(i) = col.cat[static_cast<std::size_t>(i)] == level ? 1.0 : 0.0;
      columns.push_back(dummy);
      names.push_back(col.name + "=" + level);
    }
  }

  Design out;
  out.names = names;
  out.X.resize(n, static_cast<int>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    out.X.col(static_cast<int>(j)) = columns[j];
  return out;
}

}  // namespace mqrif
