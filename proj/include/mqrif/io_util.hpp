#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mqrif {

// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_double(double value);

// Matrix as CSV with a header row.  All numerics use format_double, so a
// rerun with identical inputs produces identical bytes.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& col_names);

// Arbitrary pre-built CSV cells (first row treated as header).
void write_table_csv(const std::string& path,
                     const std::vector<std::vector<std::string>>& rows);

// Closed polygon as a standalone SVG with sample points optional.
void write_polygon_svg(const std::string& path, const Eigen::MatrixXd& vertices,
                       const Eigen::MatrixXd* points = nullptr);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mqrif
