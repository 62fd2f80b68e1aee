#pragma once

#include <stdexcept>
#include <string>

namespace mqrif {

// Base class for every failure this library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument values: tau outside (0,1), negative c, zero direction, ...
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// Input data cannot be used: missing columns, non-numeric response,
// non-positive values under a log transform, empty groups.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

// All rows identical (or otherwise carrying no spread to estimate from).
class DegenerateDataError : public DataError {
 public:
  explicit DegenerateDataError(const std::string& what) : DataError(what) {}
};

// Design matrix lost full column rank.
class RankDeficiencyError : public DataError {
 public:
  explicit RankDeficiencyError(const std::string& what) : DataError(what) {}
};

// A matrix that must be inverted is numerically singular
// (condition number above the configured threshold).
class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(const std::string& what) : Error(what) {}
};

// Iterative procedure exhausted its budget without meeting tolerances
// in a context where no best-effort result can be returned.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

}  // namespace mqrif
