#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace icee {

// Error categories surfaced by the library. The CLI maps each category to a
// nonzero exit code with a one-line "error: <category>: <message>" report.
struct Error : std::runtime_error {
  Error(std::string category, const std::string& msg)
      : std::runtime_error(msg), category(std::move(category)) {}
  std::string category;
};

struct InputError : Error {
  explicit InputError(const std::string& m) : Error("input", m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error("data", m) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};
struct ModeError : Error {
  explicit ModeError(const std::string& m) : Error("mode", m) {}
};
struct LengthError : Error {
  explicit LengthError(const std::string& m) : Error("length", m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};
struct VersionError : Error {
  explicit VersionError(const std::string& m) : Error("version", m) {}
};
struct CorruptionError : Error {
  explicit CorruptionError(const std::string& m) : Error("corruption", m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error("schema", m) {}
};
struct StateError : Error {
  explicit StateError(const std::string& m) : Error("state", m) {}
};

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matf = MatX<float>;
using Vecf = VecX<float>;
using Matd = Eigen::MatrixXd;
using Vecd = Eigen::VectorXd;

inline void require(bool cond, const char* msg) {
  if (!cond) throw InputError(msg);
}

// Standard normal pdf / cdf.
inline double norm_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace icee
