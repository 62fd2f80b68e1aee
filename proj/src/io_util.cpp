#include "mqrif/io_util.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "mqrif/errors.hpp"
#include "mqrif/parallel.hpp"

namespace mqrif {

int resolve_workers(int hint) {
  if (hint > 0) return hint;
  if (const char* env = std::getenv("MQRIF_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& col_names) {
  if (static_cast<Eigen::Index>(col_names.size()) != m.cols())
    throw InvalidArgument("write_matrix_csv: header width mismatch");
  std::string text;
  for (std::size_t j = 0; j < col_names.size(); ++j) {
    if (j) text += ',';
    text += col_names[j];
  }
  text += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) text += ',';
      text += format_double(m(i, j));
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_table_csv(const std::string& path,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string text;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) text += ',';
      const std::string& cell = row[j];
      if (cell.find_first_of(",\"\n") != std::string::npos) {
        text += '"';
        for (char ch : cell) {
          if (ch == '"') text += '"';
          text += ch;
        }
        text += '"';
      } else {
        text += cell;
      }
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_polygon_svg(const std::string& path, const Eigen::MatrixXd& vertices,
                       const Eigen::MatrixXd* points) {
  if (vertices.cols() != 2)
    throw InvalidArgument("write_polygon_svg: planar vertices required");
  double min_x = vertices.col(0).minCoeff(), max_x = vertices.col(0).maxCoeff();
  double min_y = vertices.col(1).minCoeff(), max_y = vertices.col(1).maxCoeff();
  if (points && points->rows() > 0) {
    min_x = std::min(min_x, points->col(0).minCoeff());
    max_x = std::max(max_x, points->col(0).maxCoeff());
    min_y = std::min(min_y, points->col(1).minCoeff());
    max_y = std::max(max_y, points->col(1).maxCoeff());
  }
  const double span_x = std::max(max_x - min_x, 1e-12);
  const double span_y = std::max(max_y - min_y, 1e-12);
  const double pad_x = 0.05 * span_x, pad_y = 0.05 * span_y;
  const double width = 640.0, height = 640.0;
  const auto map_x = [&](double x) {
    return (x - (min_x - pad_x)) / (span_x + 2 * pad_x) * width;
  };
  const auto map_y = [&](double y) {
    return height - (y - (min_y - pad_y)) / (span_y + 2 * pad_y) * height;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
         "viewBox=\"0 0 640 640\">\n";
  svg += "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
  if (points) {
    for (Eigen::Index i = 0; i < points->rows(); ++i) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"1.2\" fill=\"#b0c4de\"/>\n",
                    map_x((*points)(i, 0)), map_y((*points)(i, 1)));
      svg += buf;
    }
  }
  svg += "<polygon fill=\"none\" stroke=\"#c03028\" stroke-width=\"1.5\" points=\"";
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", i ? " " : "",
                  map_x(vertices(i, 0)), map_y(vertices(i, 1)));
    svg += buf;
  }
  svg += "\"/>\n</svg>\n";
  write_text_file(path, svg);
}

}  // namespace mqrif
