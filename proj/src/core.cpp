#include "dgf/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dgf {

Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

BBox BBox::expanded(double margin) const {
    return {x_min - margin, y_min - margin, x_max + margin, y_max + margin};
}

BBox BBox::united(const BBox& o) const {
    return {std::min(x_min, o.x_min), std::min(y_min, o.y_min), std::max(x_max, o.x_max),
            std::max(y_max, o.y_max)};
}

bool BBox::contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
}

BBox BBox::around(const std::vector<Point>& pts, double margin) {
    if (pts.empty()) return {};
    BBox b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const auto& p : pts) {
        b.x_min = std::min(b.x_min, p.x);
        b.y_min = std::min(b.y_min, p.y);
        b.x_max = std::max(b.x_max, p.x);
        b.y_max = std::max(b.y_max, p.y);
    }
    return b.expanded(margin);
}

namespace {

constexpr std::array<std::string_view, 2> kDomainNames{"fbd", "circuit"};
constexpr std::array<std::string_view, 6> kComponentNames{
    "resistor", "battery", "diode", "led", "capacitor", "current_source"};
constexpr std::array<std::string_view, 7> kPrimitiveNames{
    "force_arrow", "wire", "component", "junction", "ground_symbol", "body", "label"};
constexpr std::array<std::string_view, 9> kErrorNames{
    "missing_force", "wrong_direction",  "anchor_error",   "extra_force",      "wrong_polarity",
    "open_circuit",  "illegal_junction", "missing_ground", "missing_component"};

template <typename Enum, std::size_t N>
Enum parse_name(const std::array<std::string_view, N>& names, std::string_view s,
                const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    throw Error(std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Domain d) { return kDomainNames[static_cast<int>(d)]; }
std::string_view to_string(ComponentKind k) { return kComponentNames[static_cast<int>(k)]; }
std::string_view to_string(PrimitiveKind k) { return kPrimitiveNames[static_cast<int>(k)]; }
std::string_view to_string(ErrorType t) { return kErrorNames[static_cast<int>(t)]; }

Domain parse_domain(std::string_view s) {
    return parse_name<Domain>(kDomainNames, s, "domain");
}
ComponentKind parse_component_kind(std::string_view s) {
    return parse_name<ComponentKind>(kComponentNames, s, "component kind");
}
PrimitiveKind parse_primitive_kind(std::string_view s) {
    return parse_name<PrimitiveKind>(kPrimitiveNames, s, "primitive kind");
}
ErrorType parse_error_type(std::string_view s) {
    return parse_name<ErrorType>(kErrorNames, s, "error type");
}

Domain domain_of(ErrorType t) {
    switch (t) {
        case ErrorType::MissingForce:
        case ErrorType::WrongDirection:
        case ErrorType::AnchorError:
        case ErrorType::ExtraForce:
            return Domain::Fbd;
        default:
            return Domain::Circuit;
    }
}

std::vector<ErrorType> error_types_of(Domain d) {
    std::vector<ErrorType> out;
    for (ErrorType t : kAllErrorTypes) {
        if (domain_of(t) == d) out.push_back(t);
    }
    return out;
}

void validate(const Primitive& p) {
    if (!p.bbox.valid()) throw Error("primitive bbox has min > max");
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
        throw Error("primitive confidence outside [0,1]");
    }
    if ((p.kind == PrimitiveKind::Component) != p.component_kind.has_value()) {
        throw Error("component_kind must be set exactly for Component primitives");
    }
    const bool may_have_endpoints =
        p.kind == PrimitiveKind::Wire || p.kind == PrimitiveKind::ForceArrow;
    if (p.kind == PrimitiveKind::Wire && !p.endpoints) throw Error("wire without endpoints");
    if (p.endpoints) {
        if (!may_have_endpoints) throw Error("endpoints on a non-wire, non-arrow primitive");
        const BBox slack = p.bbox.expanded(1e-3);
        if (!slack.contains(p.endpoints->first) || !slack.contains(p.endpoints->second)) {
            throw Error("bbox does not enclose endpoints");
        }
    }
    if (p.orientation && !(*p.orientation >= 0.0 && *p.orientation < 360.0)) {
        throw Error("orientation outside [0,360)");
    }
}

const KeyComponent* ScenarioKey::find_component(std::string_view cid) const {
    for (const auto& c : components) {
        if (c.id == cid) return &c;
    }
    return nullptr;
}

double ScenarioKey::mean_force_magnitude() const {
    if (required_forces.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& f : required_forces) sum += f.magnitude;
    return sum / static_cast<double>(required_forces.size());
}

void validate(const ScenarioKey& key) {
    if (key.domain == Domain::Fbd && key.required_forces.empty()) {
        throw Error("FBD key '" + key.id + "' has no required forces");
    }
    if (key.domain == Domain::Circuit && key.components.empty()) {
        throw Error("circuit key '" + key.id + "' has no components");
    }
    for (const auto& [a, b] : key.connections) {
        if (!key.find_component(a) || !key.find_component(b)) {
            throw Error("key '" + key.id + "' connection names unknown component " + a + "-" + b);
        }
    }
    for (const auto& f : key.required_forces) {
        if (!std::isfinite(f.direction_deg)) {
            throw Error("key '" + key.id + "' force '" + f.name + "' has non-finite direction");
        }
    }
}

double iou(const BBox& a, const BBox& b) {
    const double area_a = a.area();
    const double area_b = b.area();
    if (area_a <= 0.0 || area_b <= 0.0) return a == b ? 1.0 : 0.0;
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (area_a + area_b - inter);
}

double bbox_gap(const BBox& a, const BBox& b) {
    const double dx = std::max({0.0, a.x_min - b.x_max, b.x_min - a.x_max});
    const double dy = std::max({0.0, a.y_min - b.y_max, b.y_min - a.y_max});
    return std::hypot(dx, dy);
}

double normalize_deg(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r = 0.0;
    return r;
}

double angle_diff(double a_deg, double b_deg) {
    const double d = normalize_deg(a_deg - b_deg);
    return d > 180.0 ? 360.0 - d : d;
}

Point direction_vector(double deg) {
    const double rad = deg * std::numbers::pi / 180.0;
    return {std::cos(rad), -std::sin(rad)};
}

double orientation_of(Point from, Point to) {
    const double rad = std::atan2(-(to.y - from.y), to.x - from.x);
    return normalize_deg(rad * 180.0 / std::numbers::pi);
}

}  // namespace dgf
