#include "esakit/serialization.hpp"

#include <cmath>

#include "esakit/errors.hpp"

namespace esakit {
namespace {

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw DomainError(std::string(what) + " must be a JSON object");
}

}  // namespace

LogitMatrix logits_from_json(const Json& j) {
  require_object(j, "logits");
  if (!j.contains("values")) throw DomainError("logits JSON needs a 'values' array");
  return LogitMatrix::from_rows(j.at("values").get<std::vector<std::vector<double>>>());
}

Json to_json(const LogitMatrix& logits) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto r = logits.matrix().row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return Json{{"values", rows}};
}

RegionPartition partition_from_json(const Json& j) {
  require_object(j, "partition");
  const auto n_queries = j.at("n_queries").get<std::size_t>();
  auto edit = j.at("edit").get<IndexSet>();
  IndexSet restoration;
  if (j.contains("restoration")) {
    restoration = j.at("restoration").get<IndexSet>();
  } else {
    std::vector<bool> is_edit(n_queries, false);
    for (auto i : edit) {
      if (i < n_queries) is_edit[i] = true;
    }
    for (std::size_t i = 0; i < n_queries; ++i) {
      if (!is_edit[i]) restoration.push_back(i);
    }
  }
  return RegionPartition(n_queries, std::move(edit), field_or<IndexSet>(j, "effect", {}),
                         j.at("n_keys").get<std::size_t>(),
                         field_or<IndexSet>(j, "object_keys", {}),
                         field_or<IndexSet>(j, "background_keys", {}), std::move(restoration));
}

Json to_json(const RegionPartition& p) {
  return Json{{"n_queries", p.n_queries()},     {"edit", p.edit()},
              {"effect", p.effect()},           {"restoration", p.restoration()},
              {"n_keys", p.n_keys()},           {"object_keys", p.object_keys()},
              {"background_keys", p.background_keys()}};
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kTranslate: return "translate";
    case TransformKind::kRotate: return "rotate";
    case TransformKind::kScale: return "scale";
    case TransformKind::kComposite: return "composite";
  }
  return "composite";
}

TransformSpec transform_spec_from_json(const Json& j) {
  require_object(j, "transform spec");
  TransformSpec spec;
  const auto kind = field_or<std::string>(j, "kind", "composite");
  if (kind == "translate") {
    spec.kind = TransformKind::kTranslate;
  } else if (kind == "rotate") {
    spec.kind = TransformKind::kRotate;
  } else if (kind == "scale") {
    spec.kind = TransformKind::kScale;
  } else if (kind == "composite") {
    spec.kind = TransformKind::kComposite;
  } else {
    throw DomainError("unknown transform kind '" + kind + "'");
  }
  if (j.contains("offset")) {
    const auto o = j.at("offset").get<std::vector<int>>();
    if (o.size() != 2) throw DomainError("offset must be [dx, dy]");
    spec.offset = {o[0], o[1]};
  }
  if (j.contains("rotation")) {
    const auto& r = j.at("rotation");
    spec.rotation = Rotation(field_or(r, "yaw", 0.0), field_or(r, "pitch", 0.0),
                             field_or(r, "roll", 0.0));
  }
  spec.scale = field_or(j, "scale", 1.0);
  spec.target_resolution = field_or(j, "target_resolution", spec.target_resolution);
  if (j.contains("target_center") && !j.at("target_center").is_null()) {
    const auto c = j.at("target_center").get<std::vector<double>>();
    if (c.size() != 2) throw DomainError("target_center must be [cx, cy]");
    spec.target_center = Point2{c[0], c[1]};
  }
  spec.validate();
  return spec;
}

Json to_json(const TransformSpec& spec) {
  Json j{{"kind", to_string(spec.kind)},
         {"offset", {spec.offset.dx, spec.offset.dy}},
         {"rotation",
          {{"yaw", spec.rotation.yaw()},
           {"pitch", spec.rotation.pitch()},
           {"roll", spec.rotation.roll()}}},
         {"scale", spec.scale},
         {"target_resolution", spec.target_resolution}};
  if (spec.target_center) {
    j["target_center"] = {spec.target_center->x, spec.target_center->y};
  } else {
    j["target_center"] = nullptr;
  }
  return j;
}

Json to_json(const EsaConfig& config) {
  return Json{{"alpha_insert", config.alpha_insert},
              {"alpha_restore", config.alpha_restore},
              {"std_scope", to_string(config.std_scope)}};
}

Json kl_to_json(double value) {
  if (std::isinf(value)) return "inf";
  return value;
}

}  // namespace esakit
