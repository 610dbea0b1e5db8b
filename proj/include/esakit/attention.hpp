#pragma once

// Attention modulation over explicit query/key region partitions: standard
// attention, Hard Modulation (finite surrogate and exact limit) and
// Effects-Sensitive Attention with separate insertion/restoration strengths.
//
// Normalization is per key column, over queries: A_ij = exp(S_ij) / sum_i exp(S_ij).

#include <cstddef>
#include <string>
#include <vector>

#include "esakit/numerics.hpp"

namespace esakit {

using IndexSet = std::vector<std::size_t>;

/// Query and key regions. Index sets are kept sorted and duplicate-free.
///
///   edit ∪ aux = queries, edit ∩ aux = ∅, edit ≠ ∅
///   effect ∪ other = aux, effect ∩ other = ∅
///   restoration ⊆ aux
///   object_keys ∩ background_keys = ∅
class RegionPartition {
 public:
  /// Validates every invariant above; aux and other are derived.
  RegionPartition(std::size_t n_queries, IndexSet edit, IndexSet effect, std::size_t n_keys,
                  IndexSet object_keys, IndexSet background_keys = {},
                  IndexSet restoration = {});

  /// Leading queries are edit, the next n_effect are effect; leading keys are
  /// object keys, the next n_background_keys are background keys. Restoration
  /// queries default to every aux query.
  static RegionPartition contiguous(std::size_t n_queries, std::size_t n_edit,
                                    std::size_t n_effect, std::size_t n_keys,
                                    std::size_t n_object_keys, std::size_t n_background_keys = 0);

  std::size_t n_queries() const noexcept { return n_queries_; }
  std::size_t n_keys() const noexcept { return n_keys_; }
  const IndexSet& edit() const noexcept { return edit_; }
  const IndexSet& aux() const noexcept { return aux_; }
  const IndexSet& effect() const noexcept { return effect_; }
  const IndexSet& other() const noexcept { return other_; }
  const IndexSet& restoration() const noexcept { return restoration_; }
  const IndexSet& object_keys() const noexcept { return object_keys_; }
  const IndexSet& background_keys() const noexcept { return background_keys_; }

  bool is_edit(std::size_t query) const { return edit_mask_.at(query); }

  /// Same regions with a different effect/other split of aux.
  RegionPartition with_effect(IndexSet effect) const;

  /// Throws ShapeError unless logits are n_queries x n_keys.
  void check_shape(const LogitMatrix& logits) const;

 private:
  std::size_t n_queries_;
  std::size_t n_keys_;
  IndexSet edit_, aux_, effect_, other_, restoration_, object_keys_, background_keys_;
  std::vector<bool> edit_mask_;
};

enum class StdScope { kAllEntries, kPerColumn };

std::string to_string(StdScope scope);
StdScope std_scope_from_string(const std::string& name);

struct EsaConfig {
  double alpha_insert = 0.1;   // edit queries x object keys
  double alpha_restore = 1.0;  // restoration queries x background keys
  StdScope std_scope = StdScope::kAllEntries;

  void validate() const;
};

/// Column-stochastic attention map: one probability column per key.
class AttentionMap {
 public:
  explicit AttentionMap(std::vector<ProbColumn> columns);

  std::size_t n_queries() const noexcept { return columns_.front().size(); }
  std::size_t n_keys() const noexcept { return columns_.size(); }
  const ProbColumn& column(std::size_t j) const;
  double operator()(std::size_t i, std::size_t j) const { return columns_[j][i]; }
  double min_entry() const;

 private:
  std::vector<ProbColumn> columns_;
};

/// Limit of Hard Modulation as the edit logits go to +inf: 1/|edit| on edit
/// queries and exactly 0 on aux queries, identical for every key.
class HardLimitForm {
 public:
  explicit HardLimitForm(RegionPartition partition);

  const RegionPartition& partition() const noexcept { return partition_; }
  const ProbColumn& column() const noexcept { return column_; }
  AttentionMap to_map() const;

 private:
  RegionPartition partition_;
  ProbColumn column_;
};

/// S_ij = q_i . k_j / sqrt(d).
LogitMatrix build_logits(const Matrix& queries, const Matrix& keys);

/// delta = alpha * population_std of the selected logits. For kPerColumn the
/// entries of `column` are used; for kAllEntries `column` is ignored.
double compute_delta(const LogitMatrix& logits, double alpha, StdScope scope,
                     std::size_t column = 0);

/// Per-column bias magnitudes; all equal for kAllEntries.
std::vector<double> column_deltas(const LogitMatrix& logits, double alpha, StdScope scope);

AttentionMap standard_attention(const LogitMatrix& logits);

/// Logits after the two ESA bias blocks, given explicit per-column deltas.
Matrix esa_biased_logits(const LogitMatrix& logits, const RegionPartition& partition,
                         const std::vector<double>& insert_deltas,
                         const std::vector<double>& restore_deltas);

AttentionMap esa_attention(const LogitMatrix& logits, const RegionPartition& partition,
                           const EsaConfig& config);

/// Edit-row logits replaced by the finite surrogate `m_value`, which must
/// be at least the largest entry of S.
AttentionMap hard_attention_surrogate(const LogitMatrix& logits,
                                      const RegionPartition& partition, double m_value);

HardLimitForm hard_attention_limit(const RegionPartition& partition);

/// d a / d s for a = softmax(s): diag(a) - a a^T.
Matrix softmax_jacobian(const ProbColumn& column);

}  // namespace esakit
