#include "esakit/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "esakit/errors.hpp"
#include "esakit/imaging.hpp"
#include "esakit/io.hpp"
#include "esakit/parallel.hpp"
#include "esakit/serialization.hpp"
#include "esakit/theory.hpp"

namespace esakit::cli {
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
  unsigned workers = 1;
  bool quiet = false;
};

struct PartitionOptions {
  std::size_t n_queries = 16;
  std::size_t n_edit = 4;
  std::size_t n_keys = 4;  // object keys
  std::size_t n_background_keys = 2;
  std::size_t head_dim = 16;
};

struct IdealOptions {
  std::optional<double> rho;
  double epsilon = 0.0;
  std::size_t n_effect = 0;
};

struct VerifyOptions {
  PartitionOptions partition;
  EsaConfig esa;
  std::string std_scope = "all";
  std::size_t trials = 100;
  IdealOptions statement1;
  IdealOptions statement2{std::nullopt, 0.01, 2};
  std::vector<double> m_grid{10, 20, 40, 80};
  bool allow_hypothesis_violation = false;
};

struct SweepCliOptions {
  PartitionOptions partition;
  IdealOptions ideal;
  std::vector<double> alphas{0.1, 0.5, 1.0};
  std::size_t trials = 100;
  bool allow_hypothesis_violation = false;
};

struct AttnmapOptions {
  std::string logits;
  std::string partition;
  std::vector<std::size_t> keys;
  std::vector<int> layout;
  EsaConfig esa;
  std::string std_scope = "all";
  std::string stem = "attn";
  int pixel_scale = 1;
};

struct ComposeOptions {
  std::string reference;
  std::string scene;
  std::string source_mask;
  std::string target_mask;
  std::string stem = "incontext";
};

struct TransformOptions {
  std::string mesh;
  std::string source_image;
  std::string source_mask;
  std::string scene;
  std::vector<int> scene_size;
  std::string spec;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed JSON in '" + path + "': " + e.what());
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw DomainError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw IoError(std::string(what) + " '" + path + "' does not exist");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

fs::path output_dir(const GlobalOptions& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + g.out + "': " + ec.message());
  return dir;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// --config support: keys of a JSON object become long options unless the same
// option is already on the command line. A nested object named after the
// subcommand takes precedence over top-level keys.

const std::vector<std::string> kSubcommands{"transform", "verify", "sweep", "attnmap", "compose"};

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

bool has_option(const std::vector<std::string>& args, const std::string& opt) {
  for (const auto& a : args) {
    if (a == opt || a.rfind(opt + "=", 0) == 0) return true;
  }
  return false;
}

std::string scalar_token(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_real(v.get<double>());
  return v.dump();
}

void append_config_tokens(const Json& cfg, const std::string& subcommand,
                          std::vector<std::string>& args) {
  if (!cfg.is_object()) throw DomainError("config file must hold a JSON object");
  Json merged = Json::object();
  for (const auto& [k, v] : cfg.items()) {
    if (std::find(kSubcommands.begin(), kSubcommands.end(), k) == kSubcommands.end()) {
      merged[k] = v;
    }
  }
  if (cfg.contains(subcommand) && cfg.at(subcommand).is_object()) {
    for (const auto& [k, v] : cfg.at(subcommand).items()) merged[k] = v;
  }
  const auto original = args;
  for (const auto& [key, value] : merged.items()) {
    if (key == "config" || (key == "spec" && value.is_object()) || value.is_null()) continue;
    std::string opt = "--" + key;
    std::replace(opt.begin(), opt.end(), '_', '-');
    if (has_option(original, opt)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(opt);
      continue;
    }
    args.push_back(opt);
    if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) {
        if (!joined.empty()) joined += ",";
        joined += scalar_token(e);
      }
      args.push_back(joined);
    } else {
      args.push_back(scalar_token(value));
    }
  }
}

// ---------------------------------------------------------------------------
// verify

RegionPartition make_partition(const PartitionOptions& p, std::size_t n_effect) {
  return RegionPartition::contiguous(p.n_queries, p.n_edit, n_effect,
                                     p.n_keys + p.n_background_keys, p.n_keys,
                                     p.n_background_keys);
}

void guard_hypothesis(const IdealSpec& spec, bool allowed) {
  if (spec.satisfies_hypothesis() || allowed) return;
  std::ostringstream msg;
  msg << "rho = " << spec.rho() << " is below 1/|edit| = "
      << 1.0 / static_cast<double>(spec.partition().edit().size())
      << " (pass --allow-hypothesis-violation to run anyway)";
  throw DomainError(msg.str());
}

Json partition_echo(const PartitionOptions& p) {
  return Json{{"n_queries", p.n_queries},
              {"n_edit", p.n_edit},
              {"n_keys", p.n_keys},
              {"n_background_keys", p.n_background_keys},
              {"head_dim", p.head_dim}};
}

Json ideal_echo(const IdealSpec& spec) {
  return Json{{"rho", spec.rho()},
              {"epsilon", spec.epsilon()},
              {"n_effect", spec.partition().effect().size()}};
}

int cmd_verify(const GlobalOptions& g, VerifyOptions o) {
  o.esa.std_scope = std_scope_from_string(o.std_scope);
  o.esa.validate();
  const auto& p = o.partition;
  const auto base = make_partition(p, 0);
  const double hypothesis_rho = 1.0 / static_cast<double>(p.n_edit);

  const IdealSpec spec1(o.statement1.rho.value_or(hypothesis_rho), o.statement1.epsilon,
                        make_partition(p, o.statement1.n_effect));
  guard_hypothesis(spec1, o.allow_hypothesis_violation);
  const auto part2 = make_partition(p, o.statement2.n_effect);
  const double rho2_default =
      0.5 * IdealSpec::feasible_rho_max(part2, o.statement2.epsilon);
  const IdealSpec spec2(o.statement2.rho.value_or(rho2_default), o.statement2.epsilon, part2);

  std::vector<TheoremReport> s1(o.trials);
  std::vector<TheoremReport> s2(o.trials);
  parallel_for(o.trials, g.workers, [&](std::size_t t) {
    auto rng = make_rng(g.seed, t);
    const auto logits = random_logits(base.n_queries(), base.n_keys(), p.head_dim, rng);
    const auto ideal1 = sample_ideal(spec1, rng());
    const auto ideal2 = sample_ideal(spec2, rng());
    s1[t] = verify_statement_1(ideal1, spec1, logits, base, o.esa);
    s2[t] = verify_statement_2(ideal2, spec2, logits, base, o.esa, o.m_grid);
  });

  Json r1{{"trial", Json::array()}, {"key", Json::array()},       {"delta", Json::array()},
          {"kl_standard", Json::array()}, {"kl_esa", Json::array()}, {"gap", Json::array()},
          {"lower_bound", Json::array()}, {"verdict", Json::array()}};
  Json r2{{"trial", Json::array()},       {"key", Json::array()},
          {"aux_mass", Json::array()},    {"kl_esa", Json::array()},
          {"upper_bound", Json::array()}, {"kl_hard_surrogates", Json::array()},
          {"kl_hard_limit", Json::array()}, {"verdict", Json::array()}};
  std::size_t v1 = 0;
  std::size_t v2 = 0;
  for (std::size_t t = 0; t < o.trials; ++t) {
    for (const auto& rec : *s1[t].statement1) {
      r1["trial"].push_back(t);
      r1["key"].push_back(rec.key);
      r1["delta"].push_back(rec.delta);
      r1["kl_standard"].push_back(rec.kl_standard);
      r1["kl_esa"].push_back(rec.kl_esa);
      r1["gap"].push_back(rec.gap);
      r1["lower_bound"].push_back(rec.lower_bound);
      r1["verdict"].push_back(rec.verdict);
      v1 += rec.verdict ? 0 : 1;
    }
    for (const auto& rec : *s2[t].statement2) {
      r2["trial"].push_back(t);
      r2["key"].push_back(rec.key);
      r2["aux_mass"].push_back(rec.aux_mass);
      r2["kl_esa"].push_back(rec.kl_esa);
      r2["upper_bound"].push_back(rec.upper_bound);
      Json seq = Json::array();
      for (double kl : rec.kl_hard_surrogates) seq.push_back(kl_to_json(kl));
      r2["kl_hard_surrogates"].push_back(seq);
      r2["kl_hard_limit"].push_back(
          kl_to_json(rec.limit_is_infinite ? INFINITY : 0.0));
      r2["verdict"].push_back(rec.verdict);
      v2 += rec.verdict ? 0 : 1;
    }
  }

  Json report{
      {"config",
       {{"seed", g.seed},
        {"trials", o.trials},
        {"partition", partition_echo(p)},
        {"esa", to_json(o.esa)},
        {"statement1_ideal", ideal_echo(spec1)},
        {"statement2_ideal", ideal_echo(spec2)},
        {"m_grid", o.m_grid},
        {"allow_hypothesis_violation", o.allow_hypothesis_violation}}},
      {"statement1", {{"verdict", v1 == 0}, {"violations", v1}, {"records", r1}}},
      {"statement2", {{"verdict", v2 == 0}, {"violations", v2}, {"records", r2}}},
      {"verdict", v1 == 0 && v2 == 0}};
  const auto path = output_dir(g) / "verify_report.json";
  write_text(path, report.dump(2) + "\n");
  if (!g.quiet) std::cout << "statement 1: " << v1 << " violations; statement 2: " << v2
            << " violations -> " << path.string() << "\n";
  return (v1 == 0 && v2 == 0) ? kOk : kVerdictFailed;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const GlobalOptions& g, const SweepCliOptions& o) {
  if (o.alphas.empty()) throw DomainError("alpha list is empty");
  const auto partition = make_partition(o.partition, 0);
  const IdealSpec spec(o.ideal.rho.value_or(1.0 / static_cast<double>(o.partition.n_edit)),
                       o.ideal.epsilon, make_partition(o.partition, o.ideal.n_effect));
  guard_hypothesis(spec, o.allow_hypothesis_violation);
  SweepOptions so;
  so.head_dim = o.partition.head_dim;
  so.workers = g.workers;
  const auto rows = sweep_alpha(partition, spec, o.alphas, o.trials, g.seed, so);

  std::string csv = "alpha,mean_gap,mean_lower_bound,violations\n";
  std::size_t total = 0;
  for (const auto& r : rows) {
    csv += format_real(r.alpha) + "," + format_real(r.mean_gap) + "," +
           format_real(r.mean_lower_bound) + "," + std::to_string(r.violations) + "\n";
    total += r.violations;
  }
  const auto path = output_dir(g) / "sweep.csv";
  write_text(path, csv);
  if (!g.quiet) std::cout << rows.size() << " rows, " << total << " violations -> " << path.string() << "\n";
  return total == 0 ? kOk : kVerdictFailed;
}

// ---------------------------------------------------------------------------
// attnmap

Raster upscale_nearest(const Raster& r, int factor) {
  if (factor == 1) return r;
  Raster out(r.width() * factor, r.height() * factor);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.set_pixel(x, y, r.pixel(x / factor, y / factor));
  }
  return out;
}

int cmd_attnmap(const GlobalOptions& g, AttnmapOptions o) {
  require_file(o.logits, "logits file");
  require_file(o.partition, "partition file");
  if (o.pixel_scale < 1) throw DomainError("pixel scale must be at least 1");
  o.esa.std_scope = std_scope_from_string(o.std_scope);
  const auto logits = logits_from_json(read_json_file(o.logits));
  const auto partition_json = read_json_file(o.partition);
  const auto partition = partition_from_json(partition_json);
  partition.check_shape(logits);

  std::vector<int> layout = o.layout;
  if (layout.empty() && partition_json.contains("layout")) {
    layout = partition_json.at("layout").get<std::vector<int>>();
  }
  if (layout.empty()) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(partition.n_queries()))));
    layout = {side, side};
  }
  if (layout.size() != 2) throw ShapeError("layout must be two integers: height,width");

  std::vector<std::size_t> keys = o.keys;
  if (keys.empty()) {
    for (std::size_t j = 0; j < partition.n_keys(); ++j) keys.push_back(j);
  }

  const std::vector<std::pair<std::string, AttentionMap>> strategies{
      {"standard", standard_attention(logits)},
      {"hard", hard_attention_limit(partition).to_map()},
      {"esa", esa_attention(logits, partition, o.esa)}};
  // Validate every layout/key before writing anything.
  std::vector<std::pair<fs::path, Raster>> outputs;
  const auto dir = fs::path(g.out);
  for (const auto& [name, map] : strategies) {
    for (auto k : keys) {
      const auto hm = attention_heatmap(map, k, layout[0], layout[1]);
      outputs.emplace_back(dir / heatmap_filename(o.stem, name, k),
                           upscale_nearest(hm.rendered, o.pixel_scale));
    }
  }
  output_dir(g);
  for (const auto& [path, img] : outputs) write_png_rgb(path, img);
  if (!g.quiet) std::cout << outputs.size() << " heatmaps -> " << dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// compose

int cmd_compose(const GlobalOptions& g, const ComposeOptions& o) {
  require_file(o.reference, "reference image");
  require_file(o.scene, "scene image");
  require_file(o.target_mask, "target mask");
  const auto reference = read_png_rgb(o.reference);
  const auto scene = read_png_rgb(o.scene);
  const auto target = read_png_mask(o.target_mask);
  Raster source(scene.width(), scene.height(), kBlack);
  if (!o.source_mask.empty()) {
    require_file(o.source_mask, "source mask");
    source = read_png_mask(o.source_mask);
  }
  const auto masked = prepare_masked_scene(scene, source, target);
  const auto pair = compose_incontext(reference, masked, target);
  const auto dir = output_dir(g);
  write_png_rgb(dir / (o.stem + "__masked_scene.png"), masked);
  write_png_rgb(dir / (o.stem + "__composite.png"), pair.composite);
  write_png_mask(dir / (o.stem + "__pair_mask.png"), pair.pair_mask);
  if (!g.quiet) std::cout << "composite " << pair.composite.width() << "x" << pair.composite.height()
            << " -> " << dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// transform

Json bbox_json(const Raster& r) {
  const auto b = mask_bbox(r);
  if (!b) return nullptr;
  return Json{{"x0", b->x0}, {"y0", b->y0}, {"x1", b->x1}, {"y1", b->y1}};
}

int cmd_transform(const GlobalOptions& g, const TransformOptions& o, const Json& config) {
  TransformSpec spec;
  if (!o.spec.empty()) {
    require_file(o.spec, "transform spec");
    spec = transform_spec_from_json(read_json_file(o.spec));
  } else if (config.is_object()) {
    const Json* node = &config;
    if (config.contains("transform") && config.at("transform").is_object()) {
      node = &config.at("transform");
    }
    if (node->contains("spec")) spec = transform_spec_from_json(node->at("spec"));
  }

  Raster scene(1, 1);
  if (!o.scene.empty()) {
    require_file(o.scene, "scene image");
    scene = read_png_rgb(o.scene);
  } else if (o.scene_size.size() == 2) {
    scene = Raster(o.scene_size[0], o.scene_size[1]);
  } else if (o.scene_size.empty()) {
    scene = Raster(spec.target_resolution, spec.target_resolution);
  } else {
    throw DomainError("scene size must be width,height");
  }

  TransformInput input = Mesh{};
  Json inputs;
  if (!o.mesh.empty()) {
    require_file(o.mesh, "mesh file");
    input = load_mesh(o.mesh);
    inputs["mesh"] = o.mesh;
  } else {
    require_file(o.source_mask, "source mask");
    Raster src = read_png_mask(o.source_mask);
    if (!o.source_image.empty()) {
      require_file(o.source_image, "source image");
      const auto img = read_png_rgb(o.source_image);
      if (img.width() != src.width() || img.height() != src.height()) {
        throw ShapeError("source image and source mask differ in size");
      }
      for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) src.set_pixel(x, y, img.pixel(x, y));
      }
      inputs["source_image"] = o.source_image;
    }
    inputs["source_mask"] = o.source_mask;
    input = std::move(src);
  }

  const auto result = apply_transform(input, spec, scene);
  const auto dir = output_dir(g);
  write_png_rgb(dir / "reference.png", result.reference);
  write_png_mask(dir / "target_mask.png", result.target_mask);
  const Json manifest{{"inputs", inputs},
                      {"scene_size", {scene.width(), scene.height()}},
                      {"spec", to_json(spec)},
                      {"reference_bbox", bbox_json(result.reference)},
                      {"target_bbox", bbox_json(result.target_mask)},
                      {"outputs", {"reference.png", "target_mask.png"}}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  if (!g.quiet) std::cout << "reference + target mask -> " << dir.string() << "\n";
  return kOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kShapeError;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kShapeError;
  } catch (const DegenerateRenderError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerateRender;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSpecError;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSpecError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return kSpecError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

void add_partition_options(CLI::App* cmd, PartitionOptions& p) {
  cmd->add_option("--n-queries", p.n_queries, "query tokens |T^(Q)|")->capture_default_str();
  cmd->add_option("--n-edit", p.n_edit, "edit-region queries")->capture_default_str();
  cmd->add_option("--n-keys", p.n_keys, "object keys")->capture_default_str();
  cmd->add_option("--n-background-keys", p.n_background_keys, "background keys")
      ->capture_default_str();
  cmd->add_option("--head-dim", p.head_dim, "query/key dimension d")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  return guarded([&]() -> int {
    std::vector<std::string> args = raw_args;
    Json config;
    if (const auto path = find_config_path(args)) {
      config = read_json_file(*path);
      std::string sub;
      for (const auto& a : args) {
        if (std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end()) {
          sub = a;
          break;
        }
      }
      append_config_tokens(config, sub, args);
    }

    CLI::App app{"Attention-modulation certification and geometric input preparation", "esakit"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--config", g.config, "JSON file with option values");
    app.add_option("--workers", g.workers, "worker threads")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress the summary line on stdout");

    VerifyOptions vo;
    auto* verify = app.add_subcommand("verify", "certify both statements of the divergence theorem");
    add_partition_options(verify, vo.partition);
    verify->add_option("--alpha-insert", vo.esa.alpha_insert)->capture_default_str();
    verify->add_option("--alpha-restore", vo.esa.alpha_restore)->capture_default_str();
    verify->add_option("--std-scope", vo.std_scope, "all | per-column")->capture_default_str();
    verify->add_option("--trials", vo.trials)->capture_default_str();
    verify->add_option("--rho", vo.statement1.rho, "statement-1 rho (default 1/|edit|)");
    verify->add_option("--epsilon", vo.statement1.epsilon)->capture_default_str();
    verify->add_option("--n-effect", vo.statement1.n_effect)->capture_default_str();
    verify->add_option("--s2-rho", vo.statement2.rho, "statement-2 rho (default half the feasible max)");
    verify->add_option("--s2-epsilon", vo.statement2.epsilon)->capture_default_str();
    verify->add_option("--s2-n-effect", vo.statement2.n_effect)->capture_default_str();
    verify->add_option("--m-grid", vo.m_grid, "hard-modulation surrogates")
        ->delimiter(',')
        ->capture_default_str();
    verify->add_flag("--allow-hypothesis-violation", vo.allow_hypothesis_violation);

    SweepCliOptions so;
    auto* sweep = app.add_subcommand("sweep", "statement-1 metrics over a grid of alphas");
    add_partition_options(sweep, so.partition);
    sweep->add_option("--alphas", so.alphas)->delimiter(',')->capture_default_str();
    sweep->add_option("--trials", so.trials)->capture_default_str();
    sweep->add_option("--rho", so.ideal.rho, "default 1/|edit|");
    sweep->add_option("--epsilon", so.ideal.epsilon)->capture_default_str();
    sweep->add_option("--n-effect", so.ideal.n_effect)->capture_default_str();
    sweep->add_flag("--allow-hypothesis-violation", so.allow_hypothesis_violation);

    AttnmapOptions ao;
    auto* attnmap = app.add_subcommand("attnmap", "heatmaps for standard, hard and ESA attention");
    attnmap->add_option("--logits", ao.logits, "logits JSON")->required();
    attnmap->add_option("--partition", ao.partition, "partition JSON")->required();
    attnmap->add_option("--keys", ao.keys, "key columns (default all)")->delimiter(',');
    attnmap->add_option("--layout", ao.layout, "height,width")->delimiter(',');
    attnmap->add_option("--alpha-insert", ao.esa.alpha_insert)->capture_default_str();
    attnmap->add_option("--alpha-restore", ao.esa.alpha_restore)->capture_default_str();
    attnmap->add_option("--std-scope", ao.std_scope)->capture_default_str();
    attnmap->add_option("--stem", ao.stem)->capture_default_str();
    attnmap->add_option("--pixel-scale", ao.pixel_scale)->capture_default_str();

    ComposeOptions co;
    auto* compose = app.add_subcommand("compose", "in-context [reference | masked scene] input");
    compose->add_option("--reference", co.reference)->required();
    compose->add_option("--scene", co.scene)->required();
    compose->add_option("--source-mask", co.source_mask);
    compose->add_option("--target-mask", co.target_mask)->required();
    compose->add_option("--stem", co.stem)->capture_default_str();

    TransformOptions to;
    auto* transform = app.add_subcommand("transform", "appearance reference and target mask");
    transform->add_option("--mesh", to.mesh, "mesh file (v/f text format)");
    transform->add_option("--source-image", to.source_image);
    transform->add_option("--source-mask", to.source_mask);
    transform->add_option("--scene", to.scene, "scene PNG (sets the target-mask size)");
    transform->add_option("--scene-size", to.scene_size, "width,height")->delimiter(',');
    transform->add_option("--spec", to.spec, "TransformSpec JSON");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kSpecError;
    }

    if (*verify) return cmd_verify(g, vo);
    if (*sweep) return cmd_sweep(g, so);
    if (*attnmap) return cmd_attnmap(g, ao);
    if (*compose) return cmd_compose(g, co);
    if (*transform) return cmd_transform(g, to, config);
    return kSpecError;
  });
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace esakit::cli
