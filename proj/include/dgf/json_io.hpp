#pragma once

// nlohmann::json bindings for the shared vocabulary types.

#include <json.hpp>

#include "dgf/core.hpp"

namespace dgf {

using json = nlohmann::json;

void to_json(json& j, const Point& p);
void from_json(const json& j, Point& p);
void to_json(json& j, const BBox& b);
void from_json(const json& j, BBox& b);
void to_json(json& j, const Primitive& p);
void from_json(const json& j, Primitive& p);
void to_json(json& j, const InjectedError& e);
void from_json(const json& j, InjectedError& e);
void to_json(json& j, const ScenarioKey& k);

/// Parses text as JSON; failures become dgf::Error naming `what`.
json parse_json(const std::string& text, const std::string& what);

/// Doubles rounded to 4 decimals so serialized floats are stable across runs.
double round4(double v);

}  // namespace dgf
