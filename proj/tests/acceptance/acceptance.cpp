// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failing criteria (capped at 125).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "esakit/cli.hpp"
#include "esakit/errors.hpp"
#include "esakit/geometry.hpp"
#include "esakit/io.hpp"
#include "esakit/theory.hpp"

using namespace esakit;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20241019;
constexpr std::size_t kCertificationTrials = 1000;
constexpr std::size_t kKeysPerTrial = 4;
constexpr std::size_t kHeadDim = 16;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

template <typename T>
T pick(std::mt19937_64& rng, std::initializer_list<T> options) {
  std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
  return *(options.begin() + d(rng));
}

// ---------------------------------------------------------------------------
// Shared trial set for the certification and gap-identity criteria.

struct Trial {
  std::size_t n_queries = 0;
  std::size_t n_edit = 0;
  double rho = 0;
  double alpha = 0;
  std::vector<Statement1Record> records;
};

std::vector<Trial> run_certification_trials(double& seconds) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Trial> trials;
  trials.reserve(kCertificationTrials);
  for (std::size_t t = 0; t < kCertificationTrials; ++t) {
    auto rng = make_rng(kSeed, t);
    Trial tr;
    tr.n_queries = pick<std::size_t>(rng, {8, 16, 64});
    tr.n_edit = pick<std::size_t>(rng, {2, 4, 8});
    tr.alpha = pick(rng, {0.1, 0.5, 1.0});
    const auto partition =
        RegionPartition::contiguous(tr.n_queries, tr.n_edit, 0, kKeysPerTrial, kKeysPerTrial);
    const double lo = 1.0 / static_cast<double>(tr.n_edit);
    const double hi = std::max(lo, IdealSpec::feasible_rho_max(partition, 0.0));
    tr.rho = std::uniform_real_distribution<double>(lo, std::nextafter(hi, 2.0))(rng);
    tr.rho = std::min(tr.rho, hi);
    const IdealSpec spec(tr.rho, 0.0, partition);
    const auto logits = random_logits(tr.n_queries, kKeysPerTrial, kHeadDim, rng);
    const auto ideal = sample_ideal(spec, rng());
    EsaConfig cfg;
    cfg.alpha_insert = tr.alpha;
    tr.records = *verify_statement_1(ideal, spec, logits, partition, cfg).statement1;
    trials.push_back(std::move(tr));
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trials;
}

Outcome criterion_certification(const std::vector<Trial>& trials, double seconds) {
  std::size_t cases = 0, ok = 0;
  double min_slack = INFINITY;
  for (const auto& t : trials) {
    for (const auto& r : t.records) {
      ++cases;
      const double slack = r.gap - r.lower_bound;
      min_slack = std::min(min_slack, slack);
      if (r.gap >= r.lower_bound - 1e-9 && r.lower_bound >= -1e-12) ++ok;
    }
  }
  Outcome o;
  o.pass = cases > 0 && ok == cases && seconds < 30.0;
  o.detail = fmt("%zu/%zu (trial x key) cases hold, min gap - bound = %.3e, %.2f s single-threaded",
                 ok, cases, min_slack, seconds);
  return o;
}

Outcome criterion_gap_identity(const std::vector<Trial>& trials) {
  std::size_t cases = 0, ok = 0, exact_ok = 0;
  double worst = 0, worst_exact = 0;
  for (const auto& t : trials) {
    for (const auto& r : t.records) {
      ++cases;
      const double err = std::abs(r.gap - stated_gap_identity(r.delta, r.ideal_edit_mass));
      worst = std::max(worst, err);
      if (err <= 1e-10) ++ok;
      const double exact_err =
          std::abs(r.gap - exact_gap(r.delta, r.ideal_edit_mass, r.standard_edit_mass));
      worst_exact = std::max(worst_exact, exact_err);
      if (exact_err <= 1e-10) ++exact_ok;
    }
  }
  Outcome o;
  o.pass = cases > 0 && ok == cases;
  o.detail = fmt("gap = delta*(sum_edit A* - 1) within 1e-10 in %zu/%zu cases, max |error| = %.3e",
                 ok, cases, worst);
  o.notes.push_back(fmt(
      "diagnostic: gap = delta*sum_edit A* - log(1 + (e^delta - 1)*sum_edit A) within 1e-10 in "
      "%zu/%zu cases, max |error| = %.3e",
      exact_ok, cases, worst_exact));
  o.notes.push_back(
      "diagnostic: the two forms agree only when the bias reaches every query of the column "
      "(no auxiliary queries); see README");
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_hard_modulation() {
  const std::vector<double> grid{10, 20, 40, 80};
  std::size_t trials = 0, infinite = 0, increasing = 0, bounded = 0, cases = 0;
  for (std::size_t t = 0; t < kCertificationTrials; ++t) {
    auto rng = make_rng(kSeed + 1, t);
    const auto nq = pick<std::size_t>(rng, {8, 16, 64});
    auto n_edit = pick<std::size_t>(rng, {2, 4, 8});
    if (n_edit >= nq) n_edit = pick<std::size_t>(rng, {2, 4});
    const std::size_t n_effect = std::min<std::size_t>(2, nq - n_edit);
    const auto partition = RegionPartition::contiguous(nq, n_edit, n_effect, kKeysPerTrial,
                                                       kKeysPerTrial);
    const double eps = 0.01;
    const double rho = std::uniform_real_distribution<double>(
        0.02, IdealSpec::feasible_rho_max(partition, eps))(rng);
    const IdealSpec spec(rho, eps, partition);
    const auto logits = random_logits(nq, kKeysPerTrial, kHeadDim, rng);
    const auto ideal = sample_ideal(spec, rng());
    const auto report = verify_statement_2(ideal, spec, logits, partition, EsaConfig{}, grid);
    ++trials;
    bool all_inf = true;
    for (const auto& r : *report.statement2) {
      ++cases;
      all_inf = all_inf && r.aux_mass > 0 && r.limit_is_infinite;
      increasing += r.surrogates_increasing;
      bounded += r.esa_bounded;
    }
    infinite += all_inf;
  }
  Outcome o;
  o.pass = infinite == trials && increasing == cases && bounded == cases;
  o.detail = fmt(
      "limit KL = inf in %zu/%zu trials, surrogate KL increasing over M=10,20,40,80 in %zu/%zu "
      "columns, ESA KL within bound in %zu/%zu columns",
      infinite, trials, increasing, cases, bounded, cases);
  return o;
}

Outcome criterion_zero_bias() {
  double worst = 0;
  for (std::size_t t = 0; t < 100; ++t) {
    auto rng = make_rng(kSeed + 2, t);
    const auto nq = pick<std::size_t>(rng, {4, 8, 16, 32});
    const auto nk = pick<std::size_t>(rng, {2, 4, 6});
    const auto partition = RegionPartition::contiguous(nq, nq / 2, 0, nk, nk / 2, nk - nk / 2);
    const auto logits = random_logits(nq, nk, kHeadDim, rng);
    const auto esa = esa_attention(logits, partition, EsaConfig{0.0, 0.0, StdScope::kAllEntries});
    const auto standard = standard_attention(logits);
    for (std::size_t j = 0; j < nk; ++j)
      for (std::size_t i = 0; i < nq; ++i) worst = std::max(worst, std::abs(esa(i, j) - standard(i, j)));
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = fmt("100 instances, max |A_esa - A| = %.3e (tolerance 1e-12)", worst);
  return o;
}

Outcome criterion_jacobian() {
  constexpr double h = 1e-5;
  double worst = 0;
  for (std::size_t t = 0; t < 20; ++t) {
    auto rng = make_rng(kSeed + 3, t);
    const std::size_t nq = 8, nk = 4;
    const auto partition = RegionPartition::contiguous(nq, 3, 0, nk, 2, 2);
    const auto logits = random_logits(nq, nk, kHeadDim, rng);
    const auto ins = column_deltas(logits, 0.5, StdScope::kAllEntries);
    const auto res = column_deltas(logits, 1.0, StdScope::kAllEntries);
    auto esa_column = [&](const Matrix& s, std::size_t j) {
      const auto biased = esa_biased_logits(LogitMatrix(s), partition, ins, res);
      std::vector<double> col(nq);
      for (std::size_t i = 0; i < nq; ++i) col[i] = biased(i, j);
      return stable_softmax(col);
    };
    for (std::size_t j = 0; j < nk; ++j) {
      const auto jac = softmax_jacobian(ProbColumn(esa_column(logits.matrix(), j)));
      for (std::size_t k = 0; k < nq; ++k) {
        Matrix up = logits.matrix(), down = logits.matrix();
        up(k, j) += h;
        down(k, j) -= h;
        const auto fu = esa_column(up, j);
        const auto fd = esa_column(down, j);
        for (std::size_t i = 0; i < nq; ++i) {
          const double numeric = (fu[i] - fd[i]) / (2 * h);
          const double rel = std::abs(numeric - jac(i, k)) / std::abs(jac(i, k));
          worst = std::max(worst, rel);
        }
      }
    }
  }
  Outcome o;
  o.pass = worst < 1e-6;
  o.detail = fmt("20 instances of 8x4, max elementwise relative error = %.3e (limit 1e-6)", worst);
  return o;
}

// ---------------------------------------------------------------------------

Mesh random_mesh(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> stretch(0.2, 3.0);
  std::uniform_int_distribution<int> count(1, 12);
  const double sx = stretch(rng), sy = stretch(rng), sz = stretch(rng);
  Mesh m;
  const int faces = count(rng);
  for (int f = 0; f < faces; ++f) {
    for (int k = 0; k < 3; ++k) {
      m.vertices.push_back({sx * u(rng), sy * u(rng), sz * u(rng)});
      m.colors.push_back({0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng)});
    }
    const auto b = static_cast<std::size_t>(3 * f);
    m.faces.push_back({b, b + 1, b + 2});
  }
  return m;
}

Outcome criterion_safety_factor() {
  const int t = 128;
  const long target = std::lround(kSafetyFactor * t);
  std::size_t ok = 0, renders = 0;
  int min_dim = t, max_dim = 0;
  double worst_offset = 0;
  std::uniform_real_distribution<double> angle(-180.0, 180.0);
  for (std::size_t k = 0; renders < 50; ++k) {
    auto rng = make_rng(kSeed + 4, k);
    const auto mesh = random_mesh(rng);
    const Rotation rot(angle(rng), angle(rng), angle(rng));
    Raster r(1, 1);
    try {
      r = render_rotated(mesh, rot, t);
    } catch (const DegenerateRenderError&) {
      continue;  // an edge-on sliver; draw another mesh
    }
    ++renders;
    const auto box = mask_bbox(r);
    if (!box) continue;
    const int dim = std::max(box->width(), box->height());
    const double off = std::max(std::abs(box->center_x() - t / 2.0), std::abs(box->center_y() - t / 2.0));
    min_dim = std::min(min_dim, dim);
    max_dim = std::max(max_dim, dim);
    worst_offset = std::max(worst_offset, off);
    if (dim >= target - 1 && dim <= target + 1 && off <= 1.0) ++ok;
  }
  Outcome o;
  o.pass = ok == renders;
  o.detail = fmt("%zu/%zu renders: max bbox dim in [%d, %d] (allowed [%ld, %ld]), worst center offset %.2f px",
                 ok, renders, min_dim, max_dim, target - 1, target + 1, worst_offset);
  return o;
}

Outcome criterion_depth() {
  const auto mesh = load_mesh(std::string(ESAKIT_DATA_DIR) + "/meshes/two_triangles.obj");
  const Mat3 id = Rotation().matrix();
  // The front triangle is the one with smaller z; identify it from the data.
  const auto& v = mesh.vertices;
  const auto& f = mesh.faces;
  const bool first_is_front = v[f[0][0]].z < v[f[1][0]].z;
  Mesh a = mesh, b = mesh;
  a.faces = {f[0]};
  b.faces = {f[1]};
  const auto cover_a = render_canvas(a, id, 64, RenderStyle::kSilhouette).image;
  const auto cover_b = render_canvas(b, id, 64, RenderStyle::kSilhouette).image;
  const auto& front = first_is_front ? a : b;
  const auto front_color = front.colors[front.faces[0][0]];
  const Rgb expected{static_cast<std::uint8_t>(std::lround(front_color.r * 255)),
                     static_cast<std::uint8_t>(std::lround(front_color.g * 255)),
                     static_cast<std::uint8_t>(std::lround(front_color.b * 255))};

  std::size_t overlap = 0, violations = 0;
  Mesh swapped = mesh;
  std::swap(swapped.faces[0], swapped.faces[1]);
  for (const Mesh* m : std::initializer_list<const Mesh*>{&mesh, &swapped}) {
    const auto img = render_canvas(*m, id, 64, RenderStyle::kAppearance).image;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        if (cover_a.pixel(x, y).r < 128 || cover_b.pixel(x, y).r < 128) continue;
        ++overlap;
        violations += img.pixel(x, y) != expected;
      }
  }
  Outcome o;
  o.pass = overlap > 0 && violations == 0;
  o.detail = fmt("%zu overlap pixels over both draw orders, %zu violations", overlap, violations);
  return o;
}

Raster rotate_image_mask(const Raster& m, int quarter_turns) {
  const int t = m.width();
  Raster out(t, t);
  for (int y = 0; y < t; ++y)
    for (int x = 0; x < t; ++x) {
      bool on = false;
      if (quarter_turns == 1) on = m.mask(t - 1 - y, x);
      if (quarter_turns == 2) on = m.mask(t - 1 - x, t - 1 - y);
      out.set_mask(x, y, on);
    }
  return out;
}

Outcome criterion_rotation() {
  double worst = 1.0;
  std::string per_case;
  for (const char* name : {"l_shape.obj", "wedge.obj", "quad.obj"}) {
    const auto mesh = load_mesh(std::string(ESAKIT_DATA_DIR) + "/meshes/" + name);
    const auto identity = render_rotated(mesh, Rotation(), 128);
    for (int quarter : {1, 2}) {
      const auto direct = render_rotated(mesh, Rotation(90.0 * quarter, 0, 0), 128);
      const double iou = mask_iou(direct, rotate_image_mask(identity, quarter));
      worst = std::min(worst, iou);
      per_case += fmt(" %s@%d=%.4f", name, 90 * quarter, iou);
    }
  }
  Outcome o;
  o.pass = worst >= 0.98;
  o.detail = fmt("min silhouette IoU %.4f (limit 0.98);", worst) + per_case;
  return o;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism(const fs::path& root) {
  std::vector<std::string> verify_outputs, sweep_outputs;
  int bad_exit = 0;
  auto once = [&](const std::string& tag, const std::string& workers) {
    const auto dir = (root / tag).string();
    bad_exit += cli::run({"verify", "--quiet", "--seed", "11", "--workers", workers, "--out", dir}) != 0;
    bad_exit += cli::run({"sweep", "--quiet", "--seed", "11", "--workers", workers, "--out", dir}) != 0;
    verify_outputs.push_back(slurp(root / tag / "verify_report.json"));
    sweep_outputs.push_back(slurp(root / tag / "sweep.csv"));
  };
  for (int r = 0; r < 3; ++r) once("repeat" + std::to_string(r), "1");
  for (const char* w : {"1", "4", "8"}) once(std::string("workers") + w, w);
  auto all_equal = [](const std::vector<std::string>& v) {
    return !v.front().empty() && std::all_of(v.begin(), v.end(), [&](const auto& s) { return s == v.front(); });
  };
  Outcome o;
  const bool vs = all_equal(verify_outputs), ss = all_equal(sweep_outputs);
  o.pass = bad_exit == 0 && vs && ss;
  o.detail = fmt("verify report %s, sweep csv %s across 3 repeats and 1/4/8 workers (%d nonzero exits)",
                 vs ? "identical" : "DIFFERS", ss ? "identical" : "DIFFERS", bad_exit);
  return o;
}

Outcome criterion_sweep(const fs::path& root) {
  const auto dir = root / "sweep";
  const int code = cli::run({"sweep", "--quiet", "--seed", "0", "--alphas", "0.1,0.5,1.0", "--trials", "100",
                             "--out", dir.string()});
  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  bool well_formed = lines.size() == 4 && lines[0] == "alpha,mean_gap,mean_lower_bound,violations";
  std::size_t violations = 0;
  const double alphas[] = {0.1, 0.5, 1.0};
  for (std::size_t r = 1; well_formed && r < lines.size(); ++r) {
    std::istringstream row(lines[r]);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      well_formed = false;
      break;
    }
    try {
      std::size_t used = 0;
      const double a = std::stod(fields[0], &used);
      well_formed = well_formed && used == fields[0].size() && a == alphas[r - 1];
      std::stod(fields[1]);
      std::stod(fields[2]);
      violations += std::stoul(fields[3]);
    } catch (const std::exception&) {
      well_formed = false;
    }
  }
  Outcome o;
  o.pass = code == 0 && well_formed && violations == 0;
  o.detail = fmt("exit %d, %zu data rows, csv %s, %zu violations", code,
                 lines.empty() ? 0 : lines.size() - 1, well_formed ? "well-formed" : "MALFORMED",
                 violations);
  return o;
}

}  // namespace

int main() {
  const auto root = fs::temp_directory_path() / "esakit_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  double seconds = 0;
  const auto trials = run_certification_trials(seconds);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1  KL improvement certificate", [&] { return criterion_certification(trials, seconds); }},
      {"C2  stated gap identity", [&] { return criterion_gap_identity(trials); }},
      {"C3  hard modulation divergence", criterion_hard_modulation},
      {"C4  zero-strength degeneracy", criterion_zero_bias},
      {"C5  softmax Jacobian", criterion_jacobian},
      {"C6  safety factor and centering", criterion_safety_factor},
      {"C7  depth-buffer fixture", criterion_depth},
      {"C8  yaw vs image rotation", criterion_rotation},
      {"C9  determinism", [&] { return criterion_determinism(root); }},
      {"C10 alpha sweep", [&] { return criterion_sweep(root); }},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("[%s] %-34s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    for (const auto& n : o.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  fs::remove_all(root);
  return std::min(failures, 125);
}
