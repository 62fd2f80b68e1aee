#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mqrif/dataset.hpp"
#include "mqrif/errors.hpp"
#include "mqrif/io_util.hpp"

#include "support.hpp"

using namespace mqrif;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "mqrif_dataset_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_tmp(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  out.close();
  return p.string();
}

DatasetSchema basic_schema() {
  DatasetSchema s;
  s.response_columns = {"y1", "y2"};
  s.covariate_columns = {"x1", "x2"};
  return s;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("plain numeric file round trip") {
  const std::string path = write_tmp("plain.csv",
                                     "y1,y2,x1,x2,extra\n"
                                     "1,2,3,4,junk\n"
                                     "5.5,-6,7e0,0.125,junk\n"
                                     "9,10,11,12,junk\n");
  Dataset d = load_csv(path, basic_schema());
  REQUIRE(d.n_rows == 3);
  CHECK(d.n_dropped_missing == 0);
  REQUIRE(d.y.rows() == 3);
  REQUIRE(d.y.cols() == 2);
  CHECK(d.y(1, 0) == 5.5);
  CHECK(d.y(1, 1) == -6.0);
  REQUIRE(d.covariates.size() == 2);
  CHECK_FALSE(d.covariates[0].categorical);
  CHECK(d.covariates[0].num(2) == 11.0);
  CHECK(d.covariates[1].num(1) == 0.125);

  Design design = encode_design(d, d.schema);
  REQUIRE(design.X.cols() == 3);
  CHECK(design.names[0] == "intercept");
  CHECK(design.names[1] == "x1");
  CHECK(design.names[2] == "x2");
  CHECK(design.X.col(0).minCoeff() == 1.0);
  CHECK(design.X(0, 1) == 3.0);
}

TEST_CASE("quoted fields keep separators newlines and escaped quotes") {
  DatasetSchema s;
  s.response_columns = {"y"};
  s.covariate_columns = {"label"};
  s.categorical_baseline["label"] = "plain";
  const std::string path = write_tmp("quoted.csv",
                                     "y,label\n"
                                     "1,plain\n"
                                     "2,\"a,b\"\n"
                                     "3,\"two\nlines\"\n"
                                     "4,\"say \"\"hi\"\"\"\n");
  Dataset d = load_csv(path, s);
  REQUIRE(d.n_rows == 4);
  const auto& cat = d.covariates[0].cat;
  CHECK(cat[0] == "plain");
  CHECK(cat[1] == "a,b");
  CHECK(cat[2] == "two\nlines");
  CHECK(cat[3] == "say \"hi\"");
}

TEST_CASE("windows line endings parse cleanly") {
  DatasetSchema s;
  s.response_columns = {"y"};
  s.covariate_columns = {"g"};
  s.categorical_baseline["g"] = "a";
  const std::string path =
      write_tmp("crlf.csv", "y,g\r\n1,a\r\n2,b\r\n3,a\r\n");
  Dataset d = load_csv(path, s);
  REQUIRE(d.n_rows == 3);
  CHECK(d.y(2, 0) == 3.0);
  CHECK(d.covariates[0].cat[1] == "b");  // no stray carriage return
}

TEST_CASE("rows with an empty used cell are dropped and counted") {
  const std::string path = write_tmp("missing.csv",
                                     "y1,y2,x1,x2\n"
                                     "1,2,3,4\n"
                                     "5,,7,8\n"
                                     "9,10,,12\n"
                                     "13,14,15,16\n"
                                     "\n");
  Dataset d = load_csv(path, basic_schema());
  CHECK(d.n_rows == 2);
  CHECK(d.n_dropped_missing == 2);
  CHECK(d.y(1, 0) == 13.0);
}

TEST_CASE("named errors for schema and content problems") {
  const std::string path = write_tmp("short.csv", "y1,y2,x1\n1,2,3\n");
  CHECK_THROWS_WITH_AS(load_csv(path, basic_schema()),
                       doctest::Contains("column 'x2' not found"), DataError);

  const std::string bad = write_tmp("bad.csv",
                                    "y1,y2,x1,x2\n"
                                    "1,2,3,4\n"
                                    "1,2,oops,4\n");
  CHECK_THROWS_WITH_AS(load_csv(bad, basic_schema()),
                       doctest::Contains("'oops' in column 'x1', data row 2"),
                       DataError);

  const std::string ragged = write_tmp("ragged.csv",
                                       "y1,y2,x1,x2\n"
                                       "1,2,3,4\n"
                                       "1,2,3\n");
  CHECK_THROWS_AS(load_csv(ragged, basic_schema()), DataError);

  CHECK_THROWS_AS(load_csv(scratch_dir().string() + "/absent.csv",
                           basic_schema()),
                  DataError);

  const std::string empty = write_tmp("headeronly.csv", "y1,y2,x1,x2\n");
  CHECK_THROWS_AS(load_csv(empty, basic_schema()), DataError);
}

TEST_CASE("log transform rewrites columns and rejects nonpositive cells") {
  DatasetSchema s = basic_schema();
  s.log_transform = {"y1", "x2"};
  const std::string path = write_tmp("logs.csv",
                                     "y1,y2,x1,x2\n"
                                     "1,2,3,4\n"
                                     "7.389056098930650,5,-6,1\n");
  Dataset d = load_csv(path, s);
  CHECK(d.y(0, 0) == 0.0);
  CHECK(d.y(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d.y(1, 1) == 5.0);               // untouched
  CHECK(d.covariates[0].num(1) == -6.0); // untouched
  CHECK(d.covariates[1].num(0) == doctest::Approx(std::log(4.0)));

  const std::string zero = write_tmp("logzero.csv",
                                     "y1,y2,x1,x2\n"
                                     "1,2,3,4\n"
                                     "0,2,3,4\n");
  CHECK_THROWS_WITH_AS(load_csv(zero, s),
                       doctest::Contains("column 'y1', data row 2"), DataError);

  DatasetSchema catlog = basic_schema();
  catlog.categorical_baseline["x1"] = "a";
  catlog.log_transform = {"x1"};
  CHECK_THROWS_AS(load_csv(path, catlog), InvalidArgument);
}

TEST_CASE("categorical expansion is lexicographic off the baseline") {
  DatasetSchema s;
  s.response_columns = {"y"};
  s.covariate_columns = {"x", "g"};
  s.categorical_baseline["g"] = "mid";
  const std::string path = write_tmp("cats.csv",
                                     "y,x,g\n"
                                     "1,0.5,low\n"
                                     "2,1.5,mid\n"
                                     "3,2.5,high\n"
                                     "4,3.5,low\n");
  Dataset d = load_csv(path, s);
  Design design = encode_design(d, s);
  REQUIRE(design.names.size() == 4);
  CHECK(design.names[0] == "intercept");
  CHECK(design.names[1] == "x");
  CHECK(design.names[2] == "g=high");
  CHECK(design.names[3] == "g=low");
  CHECK(design.X(2, 2) == 1.0);  // row 3 is the only high
  CHECK(design.X.col(2).sum() == 1.0);
  CHECK(design.X(0, 3) == 1.0);
  CHECK(design.X(3, 3) == 1.0);
  CHECK(design.X.col(3).sum() == 2.0);
  // baseline rows carry zeros in every dummy
  CHECK(design.X(1, 2) == 0.0);
  CHECK(design.X(1, 3) == 0.0);

  Design again = encode_design(d, s);
  CHECK((design.X - again.X).cwiseAbs().maxCoeff() == 0.0);

  DatasetSchema noint = s;
  noint.add_intercept = false;
  Design bare = encode_design(d, noint);
  REQUIRE(bare.names.size() == 3);
  CHECK(bare.names[0] == "x");
}

TEST_CASE("categorical misuse errors") {
  DatasetSchema s;
  s.response_columns = {"y"};
  s.covariate_columns = {"g"};
  s.categorical_baseline["g"] = "nope";
  const std::string path = write_tmp("cats2.csv",
                                     "y,g\n"
                                     "1,a\n"
                                     "2,b\n");
  Dataset d = load_csv(path, s);
  CHECK_THROWS_WITH_AS(encode_design(d, s),
                       doctest::Contains("baseline level 'nope' absent"),
                       DataError);

  DatasetSchema single;
  single.response_columns = {"y"};
  single.covariate_columns = {"g"};
  single.categorical_baseline["g"] = "a";
  const std::string mono = write_tmp("cats3.csv",
                                     "y,g\n"
                                     "1,a\n"
                                     "2,a\n");
  Dataset dm = load_csv(mono, single);
  CHECK_THROWS_WITH_AS(encode_design(dm, single),
                       doctest::Contains("single level"), DataError);

  DatasetSchema orphan;
  orphan.response_columns = {"y"};
  orphan.covariate_columns = {"g"};
  orphan.categorical_baseline["missing"] = "a";
  CHECK_THROWS_AS(load_csv(path, orphan), InvalidArgument);
}

TEST_CASE("matrix writer round trips at full precision") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0 / 3.0, -2.5e-17, 1e300, 0.1;
  const fs::path p = scratch_dir() / "roundtrip.csv";
  write_matrix_csv(p.string(), m, {"a", "b"});

  DatasetSchema s;
  s.response_columns = {"a", "b"};
  Dataset d = load_csv(p.string(), s);
  REQUIRE(d.n_rows == 2);
  CHECK(d.y(0, 0) == m(0, 0));
  CHECK(d.y(0, 1) == m(0, 1));
  CHECK(d.y(1, 0) == m(1, 0));
  CHECK(d.y(1, 1) == m(1, 1));

  // identical rewrite produces identical bytes
  const std::string first = testsup::read_file(p.string());
  write_matrix_csv(p.string(), m, {"a", "b"});
  CHECK(testsup::read_file(p.string()) == first);
}

TEST_CASE("schema validation") {
  DatasetSchema s;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);  // no responses
  s.response_columns = {"y", "y"};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);  // duplicate
  s.response_columns = {"y"};
  s.covariate_columns = {"y"};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);  // shared name
}

}  // TEST_SUITE
