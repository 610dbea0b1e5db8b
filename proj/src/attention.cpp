#include "esakit/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "esakit/errors.hpp"

namespace esakit {
namespace {

IndexSet normalized(IndexSet s, std::size_t bound, const char* name) {
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
    throw DomainError(std::string(name) + " contains duplicate indices");
  }
  if (!s.empty() && s.back() >= bound) {
    throw RangeError(std::string(name) + " index " + std::to_string(s.back()) +
                     " out of range (size " + std::to_string(bound) + ")");
  }
  return s;
}

std::vector<bool> membership(const IndexSet& s, std::size_t n) {
  std::vector<bool> m(n, false);
  for (auto i : s) m[i] = true;
  return m;
}

IndexSet complement(const IndexSet& s, std::size_t n) {
  const auto m = membership(s, n);
  IndexSet out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!m[i]) out.push_back(i);
  }
  return out;
}

bool is_subset(const IndexSet& sub, const IndexSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

IndexSet iota_set(std::size_t first, std::size_t count) {
  IndexSet s(count);
  for (std::size_t k = 0; k < count; ++k) s[k] = first + k;
  return s;
}

}  // namespace

RegionPartition::RegionPartition(std::size_t n_queries, IndexSet edit, IndexSet effect,
                                 std::size_t n_keys, IndexSet object_keys,
                                 IndexSet background_keys, IndexSet restoration)
    : n_queries_(n_queries), n_keys_(n_keys) {
  if (n_queries == 0 || n_keys == 0) throw ShapeError("partition needs queries and keys");
  edit_ = normalized(std::move(edit), n_queries, "edit");
  if (edit_.empty()) throw DomainError("edit region must be nonempty");
  aux_ = complement(edit_, n_queries);
  effect_ = normalized(std::move(effect), n_queries, "effect");
  if (!is_subset(effect_, aux_)) throw DomainError("effect region must lie inside aux");
  other_.clear();
  std::set_difference(aux_.begin(), aux_.end(), effect_.begin(), effect_.end(),
                      std::back_inserter(other_));
  restoration_ = normalized(std::move(restoration), n_queries, "restoration");
  if (!is_subset(restoration_, aux_)) {
    throw DomainError("restoration queries must lie inside aux");
  }
  object_keys_ = normalized(std::move(object_keys), n_keys, "object_keys");
  background_keys_ = normalized(std::move(background_keys), n_keys, "background_keys");
  IndexSet both;
  std::set_intersection(object_keys_.begin(), object_keys_.end(), background_keys_.begin(),
                        background_keys_.end(), std::back_inserter(both));
  if (!both.empty()) throw DomainError("object and background keys overlap");
  edit_mask_ = membership(edit_, n_queries);
}

RegionPartition RegionPartition::contiguous(std::size_t n_queries, std::size_t n_edit,
                                            std::size_t n_effect, std::size_t n_keys,
                                            std::size_t n_object_keys,
                                            std::size_t n_background_keys) {
  if (n_edit + n_effect > n_queries) throw DomainError("edit + effect exceed query count");
  if (n_object_keys + n_background_keys > n_keys) {
    throw DomainError("object + background keys exceed key count");
  }
  return RegionPartition(n_queries, iota_set(0, n_edit), iota_set(n_edit, n_effect), n_keys,
                         iota_set(0, n_object_keys), iota_set(n_object_keys, n_background_keys),
                         iota_set(n_edit, n_queries - n_edit));
}

RegionPartition RegionPartition::with_effect(IndexSet effect) const {
  return RegionPartition(n_queries_, edit_, std::move(effect), n_keys_, object_keys_,
                         background_keys_, restoration_);
}

void RegionPartition::check_shape(const LogitMatrix& logits) const {
  if (logits.rows() != n_queries_ || logits.cols() != n_keys_) {
    throw ShapeError("partition is " + std::to_string(n_queries_) + "x" +
                     std::to_string(n_keys_) + " but logits are " +
                     std::to_string(logits.rows()) + "x" + std::to_string(logits.cols()));
  }
}

std::string to_string(StdScope scope) {
  return scope == StdScope::kAllEntries ? "all" : "per-column";
}

StdScope std_scope_from_string(const std::string& name) {
  if (name == "all" || name == "all-entries") return StdScope::kAllEntries;
  if (name == "per-column") return StdScope::kPerColumn;
  throw DomainError("unknown std scope '" + name + "'");
}

void EsaConfig::validate() const {
  if (!(alpha_insert >= 0.0) || !(alpha_restore >= 0.0)) {
    throw DomainError("ESA strengths must be nonnegative");
  }
}

AttentionMap::AttentionMap(std::vector<ProbColumn> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ShapeError("attention map needs at least one key");
  for (const auto& c : columns_) {
    if (c.size() != columns_.front().size()) throw ShapeError("ragged attention map");
  }
}

const ProbColumn& AttentionMap::column(std::size_t j) const {
  if (j >= columns_.size()) {
    throw RangeError("key " + std::to_string(j) + " out of range");
  }
  return columns_[j];
}

double AttentionMap::min_entry() const {
  double m = 1.0;
  for (const auto& c : columns_) m = std::min(m, *std::min_element(c.begin(), c.end()));
  return m;
}

HardLimitForm::HardLimitForm(RegionPartition partition)
    : partition_(std::move(partition)), column_([this] {
        std::vector<double> mass(partition_.n_queries(), 0.0);
        const double share = 1.0 / static_cast<double>(partition_.edit().size());
        for (auto i : partition_.edit()) mass[i] = share;
        return ProbColumn(std::move(mass));
      }()) {}

AttentionMap HardLimitForm::to_map() const {
  return AttentionMap(std::vector<ProbColumn>(partition_.n_keys(), column_));
}

LogitMatrix build_logits(const Matrix& queries, const Matrix& keys) {
  if (queries.cols() != keys.cols()) {
    throw ShapeError("query dimension " + std::to_string(queries.cols()) +
                     " != key dimension " + std::to_string(keys.cols()));
  }
  if (queries.cols() == 0) throw ShapeError("head dimension must be at least 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(queries.cols()));
  Matrix s(queries.rows(), keys.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    for (std::size_t j = 0; j < keys.rows(); ++j) {
      CompensatedSum dot;
      for (std::size_t k = 0; k < queries.cols(); ++k) dot.add(queries(i, k) * keys(j, k));
      s(i, j) = dot.value() * scale;
    }
  }
  return LogitMatrix(std::move(s));
}

double compute_delta(const LogitMatrix& logits, double alpha, StdScope scope,
                     std::size_t column) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
  if (scope == StdScope::kAllEntries) return alpha * population_std(logits.values());
  return alpha * population_std(logits.column(column));
}

std::vector<double> column_deltas(const LogitMatrix& logits, double alpha, StdScope scope) {
  std::vector<double> out(logits.cols());
  if (scope == StdScope::kAllEntries) {
    std::fill(out.begin(), out.end(), compute_delta(logits, alpha, scope));
  } else {
    for (std::size_t j = 0; j < logits.cols(); ++j) out[j] = compute_delta(logits, alpha, scope, j);
  }
  return out;
}

namespace {

AttentionMap columnwise_softmax(const Matrix& s) {
  std::vector<ProbColumn> cols;
  cols.reserve(s.cols());
  std::vector<double> buf(s.rows());
  for (std::size_t j = 0; j < s.cols(); ++j) {
    for (std::size_t i = 0; i < s.rows(); ++i) buf[i] = s(i, j);
    cols.emplace_back(stable_softmax(buf));
  }
  return AttentionMap(std::move(cols));
}

}  // namespace

AttentionMap standard_attention(const LogitMatrix& logits) {
  return columnwise_softmax(logits.matrix());
}

Matrix esa_biased_logits(const LogitMatrix& logits, const RegionPartition& partition,
                         const std::vector<double>& insert_deltas,
                         const std::vector<double>& restore_deltas) {
  partition.check_shape(logits);
  if (insert_deltas.size() != logits.cols() || restore_deltas.size() != logits.cols()) {
    throw ShapeError("one bias magnitude per key column is required");
  }
  Matrix s = logits.matrix();
  for (auto j : partition.object_keys()) {
    for (auto i : partition.edit()) s(i, j) += insert_deltas[j];
  }
  for (auto j : partition.background_keys()) {
    for (auto i : partition.restoration()) s(i, j) += restore_deltas[j];
  }
  return s;
}

AttentionMap esa_attention(const LogitMatrix& logits, const RegionPartition& partition,
                           const EsaConfig& config) {
  config.validate();
  partition.check_shape(logits);
  // Both deltas come from the raw, pre-bias logits.
  const auto insert = column_deltas(logits, config.alpha_insert, config.std_scope);
  const auto restore = column_deltas(logits, config.alpha_restore, config.std_scope);
  return columnwise_softmax(esa_biased_logits(logits, partition, insert, restore));
}

AttentionMap hard_attention_surrogate(const LogitMatrix& logits,
                                      const RegionPartition& partition, double m_value) {
  partition.check_shape(logits);
  const auto vals = logits.values();
  const double peak = *std::max_element(vals.begin(), vals.end());
  if (!std::isfinite(m_value) || m_value < peak) {
    throw DomainError("surrogate M must be finite and at least max(S)");
  }
  Matrix s = logits.matrix();
  for (auto i : partition.edit()) {
    for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) = m_value;
  }
  return columnwise_softmax(s);
}

HardLimitForm hard_attention_limit(const RegionPartition& partition) {
  return HardLimitForm(partition);
}

Matrix softmax_jacobian(const ProbColumn& column) {
  const std::size_t n = column.size();
  Matrix j(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      j(r, c) = (r == c ? column[r] : 0.0) - column[r] * column[c];
    }
  }
  return j;
}

}  // namespace esakit
