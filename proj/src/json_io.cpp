#include "dgf/json_io.hpp"

#include <cmath>

namespace dgf {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

void to_json(json& j, const Point& p) { j = json::array({round4(p.x), round4(p.y)}); }

void from_json(const json& j, Point& p) {
    if (!j.is_array() || j.size() != 2) throw Error("point must be [x, y]");
    p = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(json& j, const BBox& b) {
    j = json::array({round4(b.x_min), round4(b.y_min), round4(b.x_max), round4(b.y_max)});
}

void from_json(const json& j, BBox& b) {
    if (!j.is_array() || j.size() != 4) throw Error("bbox must be [x_min, y_min, x_max, y_max]");
    b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void to_json(json& j, const Primitive& p) {
    j = json::object();
    j["kind"] = to_string(p.kind);
    if (p.component_kind) j["component_kind"] = to_string(*p.component_kind);
    if (p.label) j["label"] = *p.label;
    j["bbox"] = p.bbox;
    j["confidence"] = round4(p.confidence);
    if (p.orientation) j["orientation"] = round4(*p.orientation);
    if (p.endpoints) j["endpoints"] = json::array({p.endpoints->first, p.endpoints->second});
}

void from_json(const json& j, Primitive& p) {
    p = Primitive{};
    p.kind = parse_primitive_kind(j.at("kind").get<std::string>());
    if (j.contains("component_kind")) {
        p.component_kind = parse_component_kind(j["component_kind"].get<std::string>());
    }
    if (j.contains("label")) p.label = j["label"].get<std::string>();
    p.bbox = j.at("bbox").get<BBox>();
    p.confidence = j.value("confidence", 1.0);
    if (j.contains("orientation")) p.orientation = j["orientation"].get<double>();
    if (j.contains("endpoints")) {
        const auto& e = j["endpoints"];
        if (!e.is_array() || e.size() != 2) throw Error("endpoints must hold two points");
        p.endpoints = std::make_pair(e[0].get<Point>(), e[1].get<Point>());
    }
}

void to_json(json& j, const InjectedError& e) {
    j = {{"type", to_string(e.error_type)}, {"target", e.target}, {"detail", e.detail}};
}

void from_json(const json& j, InjectedError& e) {
    e.error_type = parse_error_type(j.at("type").get<std::string>());
    e.target = j.at("target").get<std::string>();
    e.detail = j.value("detail", "");
}

void to_json(json& j, const ScenarioKey& k) {
    j = {{"id", k.id}, {"domain", to_string(k.domain)}};
    if (k.domain == Domain::Fbd) {
        json forces = json::array();
        for (const auto& f : k.required_forces) {
            forces.push_back({{"name", f.name},
                              {"direction", f.direction_deg},
                              {"anchor", f.anchor},
                              {"magnitude", f.magnitude}});
        }
        j["required_forces"] = forces;
        j["is_static"] = k.is_static;
    } else {
        json comps = json::array();
        for (const auto& c : k.components) {
            json jc = {{"id", c.id}, {"kind", to_string(c.kind)}, {"position", c.position}};
            if (c.polarity_deg) jc["polarity"] = *c.polarity_deg;
            comps.push_back(jc);
        }
        j["components"] = comps;
        j["connections"] = k.connections;
        j["requires_ground"] = k.requires_ground;
        if (k.crossing_wires_connected) j["crossing_wires_connected"] = *k.crossing_wires_connected;
    }
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error("malformed JSON in " + what + ": " + e.what());
    }
}

}  // namespace dgf
