#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dgf {

/// Raised for contract violations across the library (bad input, unknown ids,
/// domain mismatches). I/O problems carry the offending path in the message.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raster coordinates: origin top-left, y grows downward.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

Point operator+(Point a, Point b);
Point operator-(Point a, Point b);
Point operator*(Point a, double s);
double distance(Point a, Point b);

struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    Point center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
    bool valid() const { return x_min <= x_max && y_min <= y_max; }

    BBox expanded(double margin) const;
    BBox united(const BBox& other) const;
    bool contains(Point p) const;

    static BBox around(const std::vector<Point>& pts, double margin = 0.0);

    friend bool operator==(const BBox&, const BBox&) = default;
};

enum class Domain { Fbd, Circuit };

enum class ComponentKind { Resistor, Battery, Diode, Led, Capacitor, CurrentSource };

enum class PrimitiveKind { ForceArrow, Wire, Component, Junction, GroundSymbol, Body, Label };

enum class ErrorType {
    MissingForce,
    WrongDirection,
    AnchorError,
    ExtraForce,
    WrongPolarity,
    OpenCircuit,
    IllegalJunction,
    MissingGround,
    MissingComponent,
};

inline constexpr ErrorType kAllErrorTypes[] = {
    ErrorType::MissingForce,    ErrorType::WrongDirection, ErrorType::AnchorError,
    ErrorType::ExtraForce,      ErrorType::WrongPolarity,  ErrorType::OpenCircuit,
    ErrorType::IllegalJunction, ErrorType::MissingGround,  ErrorType::MissingComponent,
};

Domain domain_of(ErrorType t);
std::vector<ErrorType> error_types_of(Domain d);

std::string_view to_string(Domain d);
std::string_view to_string(ComponentKind k);
std::string_view to_string(PrimitiveKind k);
std::string_view to_string(ErrorType t);

// Parsers throw dgf::Error on unknown names.
Domain parse_domain(std::string_view s);
ComponentKind parse_component_kind(std::string_view s);
PrimitiveKind parse_primitive_kind(std::string_view s);
ErrorType parse_error_type(std::string_view s);

/// One detected or ground-truth diagram element.
///
/// `orientation` is in degrees, [0, 360), 0 = rightward and 90 = up on the page
/// (the raster y axis is flipped before measuring). Arrows point tail to head;
/// polar components point along their forward direction.
///
/// `endpoints` holds (start, end) for wires and (tail, tip) for force arrows.
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Label;
    std::optional<ComponentKind> component_kind;
    BBox bbox;
    double confidence = 1.0;
    std::optional<double> orientation;
    std::optional<std::pair<Point, Point>> endpoints;
    std::optional<std::string> label;

    bool is(PrimitiveKind k) const { return kind == k; }
    bool is_component(ComponentKind k) const {
        return kind == PrimitiveKind::Component && component_kind == k;
    }
};

/// Throws dgf::Error describing the first broken Primitive invariant.
void validate(const Primitive& p);

struct RequiredForce {
    std::string name;
    double direction_deg = 0.0;
    Point anchor;
    double magnitude = 0.0;  // rendered arrow length, px
};

struct KeyComponent {
    std::string id;
    ComponentKind kind = ComponentKind::Resistor;
    std::optional<double> polarity_deg;
    Point position;  // expected symbol center; drives nearest-match assignment
};

/// Instructor answer key for one scenario.
struct ScenarioKey {
    std::string id;
    Domain domain = Domain::Fbd;
    std::vector<RequiredForce> required_forces;
    bool is_static = false;
    std::vector<KeyComponent> components;
    std::vector<std::pair<std::string, std::string>> connections;
    bool requires_ground = false;
    std::optional<bool> crossing_wires_connected;

    const KeyComponent* find_component(std::string_view id) const;
    double mean_force_magnitude() const;
};

void validate(const ScenarioKey& key);

struct InjectedError {
    ErrorType error_type = ErrorType::MissingForce;
    std::string target;
    std::string detail;

    friend bool operator==(const InjectedError&, const InjectedError&) = default;
};

/// Intersection over union; zero-area boxes give 1 when identical, else 0.
double iou(const BBox& a, const BBox& b);

/// Minimum Euclidean distance between two axis-aligned rectangles (0 if they touch).
double bbox_gap(const BBox& a, const BBox& b);

/// Minimal circular difference between two angles, in [0, 180].
double angle_diff(double a_deg, double b_deg);

/// Wraps any finite angle into [0, 360).
double normalize_deg(double deg);

/// Unit vector in raster coordinates for a page orientation.
Point direction_vector(double deg);

/// Page orientation of the raster vector from `from` to `to`.
double orientation_of(Point from, Point to);

}  // namespace dgf
