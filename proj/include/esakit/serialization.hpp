#pragma once

// JSON forms of the file-level interfaces:
//
//   logits     {"values": [[...], ...]}                   rows = queries
//   partition  {"n_queries", "edit", "effect", "restoration",
//               "n_keys", "object_keys", "background_keys", "layout": [h, w]}
//   transform  {"kind", "offset": [dx, dy], "rotation": {"yaw", "pitch", "roll"},
//               "scale", "target_resolution", "target_center": [cx, cy]}
//
// Infinite KL values are written as the string "inf".

#include <json.hpp>

#include "esakit/attention.hpp"
#include "esakit/geometry.hpp"
#include "esakit/numerics.hpp"
#include "esakit/theory.hpp"

namespace esakit {

using Json = nlohmann::ordered_json;

LogitMatrix logits_from_json(const Json& j);
Json to_json(const LogitMatrix& logits);

RegionPartition partition_from_json(const Json& j);
Json to_json(const RegionPartition& partition);

TransformSpec transform_spec_from_json(const Json& j);
Json to_json(const TransformSpec& spec);
std::string to_string(TransformKind kind);

Json to_json(const EsaConfig& config);
Json kl_to_json(double value);

}  // namespace esakit
