#pragma once

// Dense primitives shared by the attention and theory layers: a row-major
// matrix, validated logit and probability types, stable softmax, population
// standard deviation and KL divergence with an explicit infinity sentinel.

#include <cstddef>
#include <span>
#include <vector>

namespace esakit {

/// Neumaier-compensated accumulator. Keeps long reductions accurate to a few
/// ulps regardless of ordering of magnitudes.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values) noexcept;

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Pre-softmax scores S (query rows x key columns). All entries finite,
/// at least one row and one column.
class LogitMatrix {
 public:
  explicit LogitMatrix(Matrix scores);
  static LogitMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    return LogitMatrix(Matrix::from_rows(rows));
  }

  std::size_t rows() const noexcept { return scores_.rows(); }
  std::size_t cols() const noexcept { return scores_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return scores_(i, j); }
  const Matrix& matrix() const noexcept { return scores_; }
  std::span<const double> values() const noexcept { return scores_.values(); }

  /// Copy of column j, range-checked.
  std::vector<double> column(std::size_t j) const;

 private:
  Matrix scores_;
};

/// A probability vector over query tokens: entries in [0, 1] summing to 1.
class ProbColumn {
 public:
  static constexpr double kSumTolerance = 1e-12;

  ProbColumn() = default;
  /// Validates; throws DomainError on negative/over-one entries or bad sum.
  explicit ProbColumn(std::vector<double> mass);

  std::size_t size() const noexcept { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::span<const double> mass() const noexcept { return mass_; }
  auto begin() const noexcept { return mass_.begin(); }
  auto end() const noexcept { return mass_.end(); }

 private:
  std::vector<double> mass_;
};

/// KL divergence value. Infinity is a distinguished state, never produced by
/// floating-point overflow.
class Divergence {
 public:
  static Divergence finite(double value) { return Divergence(value, false); }
  static Divergence infinity() { return Divergence(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Finite value, or +inf for the sentinel.
  double value() const noexcept;

 private:
  Divergence(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Stable softmax of an arbitrary finite vector.
std::vector<double> stable_softmax(std::span<const double> logits);

/// Softmax over queries (rows) for key column j.
ProbColumn column_softmax(const LogitMatrix& logits, std::size_t j);

/// sqrt(mean((x - mean)^2)), divide-by-N.
double population_std(std::span<const double> values);

/// sum p_i log(p_i / q_i); 0 log(0/q) = 0; p_i > 0 with q_i = 0 gives the
/// infinity sentinel.
Divergence kl_divergence(const ProbColumn& p, const ProbColumn& q);

}  // namespace esakit
