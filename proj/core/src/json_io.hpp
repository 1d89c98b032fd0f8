#pragma once

// JSON conversions shared by the core's serializers. Not installed.

#include "json.hpp"

#include "bpl/neural.hpp"

namespace bpl::detail {

nlohmann::json mlp_json(const MLPParams& params);
MLPParams mlp_from_json(const nlohmann::json& j);

}  // namespace bpl::detail
