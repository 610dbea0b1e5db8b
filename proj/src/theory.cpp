#include "esakit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esakit/errors.hpp"
#include "esakit/parallel.hpp"

namespace esakit {
namespace {

constexpr double kFeasibilitySlack = 1e-12;

std::vector<double> flat_dirichlet(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = expo(rng);
  const double total = compensated_sum(w);
  for (auto& x : w) x /= total;
  return w;
}

double mass_over(const ProbColumn& column, const IndexSet& indices) {
  CompensatedSum acc;
  for (auto i : indices) acc.add(column[i]);
  return acc.value();
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void check_compatible(const IdealAttention& ideal, const IdealSpec& spec,
                      const LogitMatrix& logits, const RegionPartition& partition) {
  partition.check_shape(logits);
  if (spec.partition().n_queries() != partition.n_queries() ||
      spec.partition().edit() != partition.edit()) {
    throw ShapeError("ideal spec and ESA partition disagree on the edit region");
  }
  if (ideal.columns.size() != partition.n_keys()) {
    throw ShapeError("ideal map has " + std::to_string(ideal.columns.size()) +
                     " columns, partition has " + std::to_string(partition.n_keys()) + " keys");
  }
  for (const auto& c : ideal.columns) {
    if (c.size() != partition.n_queries()) throw ShapeError("ideal column length mismatch");
  }
  if (partition.object_keys().empty()) {
    throw PreconditionError("theorem checks need at least one object key");
  }
}

TheoremReport base_report(const IdealSpec& spec, const EsaConfig& config,
                          const AttentionMap& standard) {
  TheoremReport r;
  r.rho = spec.rho();
  r.epsilon = spec.epsilon();
  r.config = config;
  r.beta = standard.min_entry();
  return r;
}

}  // namespace

IdealSpec::IdealSpec(double rho, double epsilon, RegionPartition partition)
    : rho_(rho), epsilon_(epsilon), partition_(std::move(partition)) {
  if (!(rho_ > 0.0 && rho_ < 1.0)) throw DomainError("rho must lie in (0, 1)");
  if (!(epsilon_ >= 0.0 && epsilon_ < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  if (!(epsilon_ < rho_)) throw DomainError("epsilon must be smaller than rho");
  critical_ = set_union(partition_.edit(), partition_.effect());
  const double floor_mass = static_cast<double>(critical_.size()) * rho_;
  if (floor_mass > 1.0 - epsilon_ + kFeasibilitySlack) {
    std::ostringstream msg;
    msg << "infeasible ideal spec: (|edit| + |effect|) * rho = " << floor_mass
        << " exceeds 1 - epsilon = " << 1.0 - epsilon_;
    throw DomainError(msg.str());
  }
}

bool IdealSpec::satisfies_hypothesis() const noexcept {
  return rho_ * static_cast<double>(partition_.edit().size()) >= 1.0 - kFeasibilitySlack;
}

double IdealSpec::feasible_rho_max(const RegionPartition& partition, double epsilon) {
  const auto critical = partition.edit().size() + partition.effect().size();
  return (1.0 - epsilon) / static_cast<double>(critical);
}

IdealConditions check_ideal_conditions(const ProbColumn& column, const IdealSpec& spec) {
  const auto& part = spec.partition();
  IdealConditions c;
  c.object_floor = std::all_of(part.edit().begin(), part.edit().end(),
                               [&](std::size_t i) { return column[i] >= spec.rho(); });
  c.effect_floor = std::all_of(part.effect().begin(), part.effect().end(),
                               [&](std::size_t i) { return column[i] >= spec.rho(); });
  c.critical_mass =
      mass_over(column, spec.critical()) >= 1.0 - spec.epsilon() - kFeasibilitySlack;
  return c;
}

IdealAttention sample_ideal(const IdealSpec& spec, std::uint64_t seed) {
  const auto& part = spec.partition();
  const auto& critical = spec.critical();
  const auto& other = part.other();
  auto rng = make_rng(seed, 0x1dea1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  IdealAttention out;
  out.columns.reserve(part.n_keys());
  for (std::size_t j = 0; j < part.n_keys(); ++j) {
    const double m = other.empty() ? 1.0 : 1.0 - spec.epsilon() * unit(rng);
    const double spare =
        std::max(0.0, m - static_cast<double>(critical.size()) * spec.rho());
    std::vector<double> mass(part.n_queries(), 0.0);
    const auto share = flat_dirichlet(critical.size(), rng);
    for (std::size_t k = 0; k < critical.size(); ++k) {
      mass[critical[k]] = spec.rho() + spare * share[k];
    }
    if (!other.empty()) {
      const auto split = flat_dirichlet(other.size(), rng);
      for (std::size_t k = 0; k < other.size(); ++k) mass[other[k]] = (1.0 - m) * split[k];
    }
    ProbColumn column(std::move(mass));
    if (!check_ideal_conditions(column, spec).all()) {
      throw InternalError("sampled ideal column violates the ideal conditions");
    }
    out.aux_mass.push_back(mass_over(column, part.aux()));
    out.columns.push_back(std::move(column));
  }
  return out;
}

bool TheoremReport::statement1_holds() const {
  return statement1 && std::all_of(statement1->begin(), statement1->end(),
                                   [](const auto& r) { return r.verdict; });
}

bool TheoremReport::statement2_holds() const {
  return statement2 && std::all_of(statement2->begin(), statement2->end(),
                                   [](const auto& r) { return r.verdict; });
}

bool TheoremReport::verdict() const {
  if (!statement1 && !statement2) return false;
  return (!statement1 || statement1_holds()) && (!statement2 || statement2_holds());
}

double stated_gap_identity(double delta, double ideal_edit_mass) {
  return delta * (ideal_edit_mass - 1.0);
}

double exact_gap(double delta, double ideal_edit_mass, double standard_edit_mass) {
  return delta * ideal_edit_mass - std::log1p(std::expm1(delta) * standard_edit_mass);
}

TheoremReport verify_statement_1(const IdealAttention& ideal, const IdealSpec& spec,
                                 const LogitMatrix& logits, const RegionPartition& partition,
                                 const EsaConfig& config) {
  check_compatible(ideal, spec, logits, partition);
  const auto standard = standard_attention(logits);
  const auto esa = esa_attention(logits, partition, config);
  const auto deltas = column_deltas(logits, config.alpha_insert, config.std_scope);
  const double edit_count = static_cast<double>(partition.edit().size());

  auto report = base_report(spec, config, standard);
  std::vector<Statement1Record> records;
  for (auto j : partition.object_keys()) {
    const auto& star = ideal.columns[j];
    const auto kl_std = kl_divergence(star, standard.column(j));
    const auto kl_esa = kl_divergence(star, esa.column(j));
    if (kl_std.is_infinite() || kl_esa.is_infinite()) {
      throw InternalError("infinite KL against a softmax of finite logits");
    }
    Statement1Record r;
    r.key = j;
    r.delta = deltas[j];
    r.kl_standard = kl_std.value();
    r.kl_esa = kl_esa.value();
    r.gap = r.kl_standard - r.kl_esa;
    r.lower_bound = r.delta * (edit_count * spec.rho() - 1.0);
    r.ideal_edit_mass = mass_over(star, partition.edit());
    r.standard_edit_mass = mass_over(standard.column(j), partition.edit());
    r.verdict = r.gap >= r.lower_bound - kTheoremTolerance && r.lower_bound >= -1e-12;
    records.push_back(r);
  }
  report.statement1 = std::move(records);
  return report;
}

TheoremReport verify_statement_2(const IdealAttention& ideal, const IdealSpec& spec,
                                 const LogitMatrix& logits, const RegionPartition& partition,
                                 const EsaConfig& config, const std::vector<double>& m_grid) {
  check_compatible(ideal, spec, logits, partition);
  if (m_grid.empty()) throw DomainError("M grid is empty");
  if (!std::is_sorted(m_grid.begin(), m_grid.end()) ||
      std::adjacent_find(m_grid.begin(), m_grid.end()) != m_grid.end()) {
    throw DomainError("M grid must be strictly increasing");
  }
  for (auto j : partition.object_keys()) {
    if (!(ideal.aux_mass[j] > 0.0)) {
      throw PreconditionError("ideal column " + std::to_string(j) +
                              " has no aux mass; the hard-modulation clause is vacuous");
    }
  }

  const auto standard = standard_attention(logits);
  const auto esa = esa_attention(logits, partition, config);
  const auto limit = hard_attention_limit(partition);
  std::vector<AttentionMap> surrogates;
  surrogates.reserve(m_grid.size());
  for (double m : m_grid) surrogates.push_back(hard_attention_surrogate(logits, partition, m));

  auto report = base_report(spec, config, standard);
  report.m_grid = m_grid;
  const double bound =
      static_cast<double>(partition.n_queries()) * std::log(1.0 / report.beta);

  std::vector<Statement2Record> records;
  for (auto j : partition.object_keys()) {
    const auto& star = ideal.columns[j];
    Statement2Record r;
    r.key = j;
    r.aux_mass = ideal.aux_mass[j];
    const auto kl_esa = kl_divergence(star, esa.column(j));
    if (kl_esa.is_infinite()) throw InternalError("infinite KL against ESA attention");
    r.kl_esa = kl_esa.value();
    r.upper_bound = bound;
    for (const auto& s : surrogates) {
      r.kl_hard_surrogates.push_back(kl_divergence(star, s.column(j)).value());
    }
    r.limit_is_infinite = kl_divergence(star, limit.column()).is_infinite();
    r.surrogates_increasing = true;
    for (std::size_t k = 1; k < r.kl_hard_surrogates.size(); ++k) {
      const double prev = r.kl_hard_surrogates[k - 1];
      const double next = r.kl_hard_surrogates[k];
      if (!(next > prev + kIncreaseNoiseFloor)) r.surrogates_increasing = false;
    }
    r.esa_bounded = r.kl_esa <= r.upper_bound + kTheoremTolerance;
    r.verdict = r.limit_is_infinite && r.surrogates_increasing && r.esa_bounded;
    records.push_back(std::move(r));
  }
  report.statement2 = std::move(records);
  return report;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

LogitMatrix random_logits(std::size_t n_queries, std::size_t n_keys, std::size_t d,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix q(n_queries, d);
  Matrix k(n_keys, d);
  for (std::size_t i = 0; i < n_queries; ++i) {
    for (std::size_t c = 0; c < d; ++c) q(i, c) = normal(rng);
  }
  for (std::size_t i = 0; i < n_keys; ++i) {
    for (std::size_t c = 0; c < d; ++c) k(i, c) = normal(rng);
  }
  return build_logits(q, k);
}

std::vector<SweepRow> sweep_alpha(const RegionPartition& partition, const IdealSpec& spec,
                                  const std::vector<double>& alphas, std::size_t trials,
                                  std::uint64_t seed, const SweepOptions& options) {
  for (double a : alphas) {
    if (!(a >= 0.0)) throw DomainError("sweep alphas must be nonnegative");
  }
  // records[t][a] holds the statement-1 records of trial t at alpha a.
  std::vector<std::vector<std::vector<Statement1Record>>> records(trials);
  parallel_for(trials, options.workers, [&](std::size_t t) {
    auto rng = make_rng(seed, t);
    const auto logits =
        random_logits(partition.n_queries(), partition.n_keys(), options.head_dim, rng);
    const auto ideal = sample_ideal(spec, rng());
    records[t].reserve(alphas.size());
    for (double a : alphas) {
      EsaConfig cfg;
      cfg.alpha_insert = a;
      records[t].push_back(*verify_statement_1(ideal, spec, logits, partition, cfg).statement1);
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    CompensatedSum gap;
    CompensatedSum lb;
    std::size_t n = 0;
    SweepRow row;
    row.alpha = alphas[a];
    for (std::size_t t = 0; t < trials; ++t) {
      for (const auto& r : records[t][a]) {
        gap.add(r.gap);
        lb.add(r.lower_bound);
        ++n;
        if (!r.verdict) ++row.violations;
      }
    }
    if (n > 0) {
      row.mean_gap = gap.value() / static_cast<double>(n);
      row.mean_lower_bound = lb.value() / static_cast<double>(n);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace esakit
