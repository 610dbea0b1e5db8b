#pragma once

// Numerical certification of the ESA divergence theorem.
//
// An ideal attention map A* puts at least rho on every object (edit) and
// effect query and at least 1 - eps on their union. For such maps:
//
//   (1) KL(A*|A) - KL(A*|A_esa) >= delta (|edit| rho - 1) >= 0  when rho >= 1/|edit|
//   (2) KL(A*|A_hard) = +inf while KL(A*|A_esa) <= |Q| log(1 / min A)
//
// The checks below evaluate both sides per key column and report verdicts.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "esakit/attention.hpp"
#include "esakit/numerics.hpp"

namespace esakit {

/// Absolute slack for inequality checks on KL values.
inline constexpr double kTheoremTolerance = 1e-9;
/// A step of the hard-surrogate KL sequence must exceed this to count as an increase.
inline constexpr double kIncreaseNoiseFloor = 1e-12;

class IdealSpec {
 public:
  /// Throws DomainError naming the violated inequality.
  IdealSpec(double rho, double epsilon, RegionPartition partition);

  double rho() const noexcept { return rho_; }
  double epsilon() const noexcept { return epsilon_; }
  const RegionPartition& partition() const noexcept { return partition_; }

  /// edit ∪ effect, sorted.
  const IndexSet& critical() const noexcept { return critical_; }

  /// rho >= 1/|edit|, the theorem's hypothesis.
  bool satisfies_hypothesis() const noexcept;

  /// Largest rho for which the spec stays feasible at this epsilon.
  static double feasible_rho_max(const RegionPartition& partition, double epsilon);

 private:
  double rho_;
  double epsilon_;
  RegionPartition partition_;
  IndexSet critical_;
};

struct IdealAttention {
  std::vector<ProbColumn> columns;  // one per key
  std::vector<double> aux_mass;     // sum of A* over aux queries, per key
};

/// The three necessary conditions, evaluated verbatim on one column.
struct IdealConditions {
  bool object_floor = false;   // A*_ij >= rho on every object (edit) query
  bool effect_floor = false;   // A*_ij >= rho on every effect query
  bool critical_mass = false;  // sum over object ∪ effect >= 1 - eps
  bool all() const noexcept { return object_floor && effect_floor && critical_mass; }
};

IdealConditions check_ideal_conditions(const ProbColumn& column, const IdealSpec& spec);

/// Deterministic in (spec, seed). Each column: critical mass m ~ U[1-eps, 1]
/// (m = 1 when there are no other queries), rho floor plus a flat-Dirichlet
/// share of m - |critical| rho on critical queries, and a flat-Dirichlet split
/// of 1 - m over other queries.
IdealAttention sample_ideal(const IdealSpec& spec, std::uint64_t seed);

struct Statement1Record {
  std::size_t key = 0;
  double delta = 0.0;
  double kl_standard = 0.0;
  double kl_esa = 0.0;
  double gap = 0.0;
  double lower_bound = 0.0;
  double ideal_edit_mass = 0.0;     // sum_{i in edit} A*_ij
  double standard_edit_mass = 0.0;  // sum_{i in edit} A_ij
  bool verdict = false;
};

struct Statement2Record {
  std::size_t key = 0;
  double aux_mass = 0.0;
  double kl_esa = 0.0;
  double upper_bound = 0.0;
  std::vector<double> kl_hard_surrogates;  // +inf if a surrogate underflowed
  bool limit_is_infinite = false;
  bool surrogates_increasing = false;
  bool esa_bounded = false;
  bool verdict = false;
};

struct TheoremReport {
  double rho = 0.0;
  double epsilon = 0.0;
  EsaConfig config;
  std::vector<double> m_grid;
  double beta = 0.0;  // min_ij of the standard map
  std::optional<std::vector<Statement1Record>> statement1;
  std::optional<std::vector<Statement2Record>> statement2;

  bool statement1_holds() const;
  bool statement2_holds() const;
  /// True iff every present section holds.
  bool verdict() const;
};

/// gap as the exact penultimate line of the textbook derivation states it:
/// delta * (sum_edit A* - 1).
double stated_gap_identity(double delta, double ideal_edit_mass);

/// Exact gap when a single delta biases only the edit rows of a column:
/// delta * sum_edit A* - log(1 + (e^delta - 1) * sum_edit A).
double exact_gap(double delta, double ideal_edit_mass, double standard_edit_mass);

TheoremReport verify_statement_1(const IdealAttention& ideal, const IdealSpec& spec,
                                 const LogitMatrix& logits, const RegionPartition& partition,
                                 const EsaConfig& config);

TheoremReport verify_statement_2(const IdealAttention& ideal, const IdealSpec& spec,
                                 const LogitMatrix& logits, const RegionPartition& partition,
                                 const EsaConfig& config, const std::vector<double>& m_grid);

/// mt19937_64 seeded from (seed, stream) through seed_seq.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

/// Logits from N(0, 1) queries and keys of head dimension d.
LogitMatrix random_logits(std::size_t n_queries, std::size_t n_keys, std::size_t d,
                          std::mt19937_64& rng);

struct SweepRow {
  double alpha = 0.0;
  double mean_gap = 0.0;
  double mean_lower_bound = 0.0;
  std::size_t violations = 0;
};

struct SweepOptions {
  std::size_t head_dim = 16;
  unsigned workers = 1;
};

/// For each alpha (used as the insertion strength), runs `trials` statement-1
/// checks. Trial t uses the same ideal and logits for every alpha.
std::vector<SweepRow> sweep_alpha(const RegionPartition& partition, const IdealSpec& spec,
                                  const std::vector<double>& alphas, std::size_t trials,
                                  std::uint64_t seed, const SweepOptions& options = {});

}  // namespace esakit
