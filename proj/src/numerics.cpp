#include "esakit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "esakit/errors.hpp"

namespace esakit {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix: " + std::to_string(values_.size()) + " values for " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.front().size();
  std::vector<double> flat;
  flat.reserve(n * m);
  for (const auto& r : rows) {
    if (r.size() != m) throw ShapeError("matrix: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Matrix(n, m, std::move(flat));
}

LogitMatrix::LogitMatrix(Matrix scores) : scores_(std::move(scores)) {
  if (scores_.rows() == 0 || scores_.cols() == 0) {
    throw ShapeError("logit matrix needs at least one row and one column");
  }
  for (double v : scores_.values()) {
    if (!std::isfinite(v)) throw DomainError("logit matrix entries must be finite");
  }
}

std::vector<double> LogitMatrix::column(std::size_t j) const {
  if (j >= cols()) {
    throw RangeError("column " + std::to_string(j) + " out of range (cols=" +
                     std::to_string(cols()) + ")");
  }
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = scores_(i, j);
  return out;
}

ProbColumn::ProbColumn(std::vector<double> mass) : mass_(std::move(mass)) {
  if (mass_.empty()) throw DomainError("probability column is empty");
  for (double p : mass_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("probability entry " + std::to_string(p) + " outside [0, 1]");
    }
  }
  const double total = compensated_sum(mass_);
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw DomainError("probability column sums to " + std::to_string(total));
  }
}

double Divergence::value() const noexcept {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

std::vector<double> stable_softmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  CompensatedSum z;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    z.add(out[i]);
  }
  const double denom = z.value();
  for (double& v : out) v /= denom;
  return out;
}

ProbColumn column_softmax(const LogitMatrix& logits, std::size_t j) {
  return ProbColumn(stable_softmax(logits.column(j)));
}

double population_std(std::span<const double> values) {
  if (values.empty()) throw DomainError("standard deviation of an empty sample");
  const double n = static_cast<double>(values.size());
  const double mean = compensated_sum(values) / n;
  CompensatedSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  return std::sqrt(sq.value() / n);
}

Divergence kl_divergence(const ProbColumn& p, const ProbColumn& q) {
  if (p.size() != q.size()) {
    throw ShapeError("kl divergence: lengths " + std::to_string(p.size()) + " and " +
                     std::to_string(q.size()));
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return Divergence::infinity();
    acc.add(p[i] * std::log(p[i] / q[i]));
  }
  // Gibbs: tiny negative totals are rounding only.
  return Divergence::finite(std::max(acc.value(), 0.0));
}

}  // namespace esakit
