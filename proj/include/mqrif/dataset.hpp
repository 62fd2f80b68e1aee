#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mqrif {

struct DatasetSchema {
  std::vector<std::string> response_columns;
  std::vector<std::string> covariate_columns;
  // Categorical covariates and the level used as the dummy baseline.
  std::map<std::string, std::string> categorical_baseline;
  // Columns (responses or numeric covariates) to log-transform.
  std::vector<std::string> log_transform;
  bool add_intercept = true;

  void validate() const;
};

struct Dataset {
  Eigen::MatrixXd y;  // n x p responses
  std::vector<std::string> response_names;

  struct Column {
    std::string name;
    bool categorical = false;
    Eigen::VectorXd num;             // values when numeric
    std::vector<std::string> cat;    // labels when categorical
  };
  std::vector<Column> covariates;  // declaration order of the schema

  long n_rows = 0;
  long n_dropped_missing = 0;
  DatasetSchema schema;
};

// RFC-4180 style CSV reader: quoted fields, embedded separators/quotes/
// newlines, header row required.  Rows with a missing value in any used
// column are dropped and counted.
Dataset load_csv(const std::string& path, const DatasetSchema& schema);

struct Design {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
};

// Deterministic design expansion: intercept first (when requested), then
// covariates in declaration order; each categorical becomes one dummy per
// non-baseline level in lexicographic order.
Design encode_design(const Dataset& data, const DatasetSchema& schema);

}  // namespace mqrif
