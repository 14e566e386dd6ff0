#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "dgf/synthgen.hpp"
#include "library.hpp"

namespace dgf::synth {
namespace {

using detail::kArrowHeadHalfWidth;
using detail::kArrowHeadLength;
using detail::kJunctionRadius;
using detail::kSymbolHalfSpan;
using detail::kTerminalGap;

struct Shape {
    enum class Type { Segment, Polygon, Disc, Ring };
    Type type;
    std::vector<Point> pts;
    double radius = 0.0;
};

struct Element {
    std::optional<Primitive> proto;  // nullopt for unannotated decoration
    std::vector<Shape> shapes;
};

Shape seg(Point a, Point b) { return {Shape::Type::Segment, {a, b}}; }
Shape poly(std::vector<Point> pts) { return {Shape::Type::Polygon, std::move(pts)}; }
Shape disc(Point c, double r) { return {Shape::Type::Disc, {c}, r}; }
Shape ring(Point c, double r) { return {Shape::Type::Ring, {c}, r}; }

template <typename F>
void map_points(Element& e, F&& f) {
    for (auto& s : e.shapes) {
        for (auto& p : s.pts) p = f(p);
    }
    if (e.proto && e.proto->endpoints) {
        e.proto->endpoints->first = f(e.proto->endpoints->first);
        e.proto->endpoints->second = f(e.proto->endpoints->second);
    }
}

Element arrow_element(const std::string& name, Point tail, Point tip) {
    const double len = distance(tail, tip);
    const Point u = (tip - tail) * (1.0 / len);
    const Point n{-u.y, u.x};
    const Point base = tip - u * kArrowHeadLength;
    Element e;
    Primitive p;
    p.kind = PrimitiveKind::ForceArrow;
    p.label = name;
    p.endpoints = std::make_pair(tail, tip);
    e.proto = p;
    e.shapes = {seg(tail, base),
                poly({tip, base + n * kArrowHeadHalfWidth, base - n * kArrowHeadHalfWidth})};
    return e;
}

// Symbol strokes in a local frame: u along the forward axis, v across it.
std::vector<Shape> symbol_shapes(ComponentKind kind) {
    using K = ComponentKind;
    std::vector<Shape> s;
    switch (kind) {
        case K::Resistor:
            s = {seg({-30, 0}, {-20, 0}), seg({20, 0}, {30, 0}),
                 seg({-20, -8}, {20, -8}), seg({20, -8}, {20, 8}),
                 seg({20, 8}, {-20, 8}),   seg({-20, 8}, {-20, -8})};
            break;
        case K::Battery:  // short (-) plate behind, long (+) plate ahead
            s = {seg({-30, 0}, {-4, 0}), seg({-4, -8}, {-4, 8}), seg({4, -15}, {4, 15}),
                 seg({4, 0}, {30, 0})};
            break;
        case K::Capacitor:
            s = {seg({-30, 0}, {-4, 0}), seg({-4, -12}, {-4, 12}), seg({4, -12}, {4, 12}),
                 seg({4, 0}, {30, 0})};
            break;
        case K::Diode:
        case K::Led:
            s = {seg({-30, 0}, {-8, 0}), poly({{-8, -8}, {-8, 8}, {8, 0}}), seg({8, -8}, {8, 8}),
                 seg({8, 0}, {30, 0})};
            if (kind == K::Led) {
                s.push_back(seg({-2, -13}, {4, -19}));
                s.push_back(seg({4, -13}, {10, -19}));
            }
            break;
        case K::CurrentSource:
            s = {ring({0, 0}, 14), seg({-30, 0}, {-14, 0}), seg({14, 0}, {30, 0}),
                 seg({-7, 0}, {3, 0}), poly({{3, -4}, {3, 4}, {8, 0}})};
            break;
    }
    return s;
}

Element component_element(const detail::Placement& pl, double orientation) {
    const Point f = direction_vector(orientation);
    const Point n{-f.y, f.x};
    Element e;
    e.shapes = symbol_shapes(pl.kind);
    for (auto& s : e.shapes) {
        for (auto& p : s.pts) p = pl.center + f * p.x + n * p.y;
    }
    Primitive p;
    p.kind = PrimitiveKind::Component;
    p.component_kind = pl.kind;
    p.label = pl.id;
    p.orientation = normalize_deg(orientation);
    e.proto = p;
    return e;
}

Element ground_element(Point c) {
    Element e;
    e.shapes = {seg(detail::ground_terminal(c), {c.x, c.y - 8}), seg({c.x - 15, c.y - 8}, {c.x + 15, c.y - 8}),
                seg({c.x - 10, c.y - 2}, {c.x + 10, c.y - 2}), seg({c.x - 5, c.y + 4}, {c.x + 5, c.y + 4})};
    Primitive p;
    p.kind = PrimitiveKind::GroundSymbol;
    p.label = "ground";
    p.orientation = 270.0;
    e.proto = p;
    return e;
}

Element wire_element(int index, Point a, Point b) {
    Element e;
    e.shapes = {seg(a, b)};
    Primitive p;
    p.kind = PrimitiveKind::Wire;
    p.label = "w" + std::to_string(index);
    p.endpoints = std::make_pair(a, b);
    e.proto = p;
    return e;
}

Element junction_element(int index, Point c) {
    Element e;
    e.shapes = {disc(c, kJunctionRadius)};
    Primitive p;
    p.kind = PrimitiveKind::Junction;
    p.label = "j" + std::to_string(index);
    e.proto = p;
    return e;
}

Element body_element(const BBox& b) {
    Element e;
    const Point tl{b.x_min, b.y_min}, tr{b.x_max, b.y_min}, br{b.x_max, b.y_max}, bl{b.x_min, b.y_max};
    e.shapes = {seg(tl, tr), seg(tr, br), seg(br, bl), seg(bl, tl)};
    Primitive p;
    p.kind = PrimitiveKind::Body;
    p.label = "body";
    e.proto = p;
    return e;
}

double segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + ab * t);
}

bool inside_polygon(Point p, const std::vector<Point>& poly_pts) {
    bool in = false;
    for (std::size_t i = 0, j = poly_pts.size() - 1; i < poly_pts.size(); j = i++) {
        const Point& a = poly_pts[i];
        const Point& b = poly_pts[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
            in = !in;
        }
    }
    return in;
}

BBox shape_bounds(const Shape& s, double half_w) {
    switch (s.type) {
        case Shape::Type::Disc: return BBox::around(s.pts, s.radius);
        case Shape::Type::Ring: return BBox::around(s.pts, s.radius + half_w);
        default: return BBox::around(s.pts, half_w);
    }
}

bool shape_covers(const Shape& s, Point p, double half_w) {
    switch (s.type) {
        case Shape::Type::Segment:
            return segment_distance(p, s.pts[0], s.pts[1]) <= half_w;
        case Shape::Type::Polygon: {
            if (inside_polygon(p, s.pts)) return true;
            for (std::size_t i = 0; i < s.pts.size(); ++i) {
                if (segment_distance(p, s.pts[i], s.pts[(i + 1) % s.pts.size()]) <= half_w) return true;
            }
            return false;
        }
        case Shape::Type::Disc:
            return distance(p, s.pts[0]) <= s.radius;
        case Shape::Type::Ring:
            return std::abs(distance(p, s.pts[0]) - s.radius) <= half_w;
    }
    return false;
}

std::string fmt_deg(const char* key, double v) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(1);
    ss << key << "=" << v;
    return ss.str();
}

// Wire endpoints that land on a symbol terminal are pulled back along the wire.
Point trim_endpoint(Point end, Point other, const std::vector<Point>& terminals) {
    for (const auto& t : terminals) {
        if (distance(end, t) <= 1.0) {
            const double len = distance(end, other);
            if (len <= kTerminalGap) return end;
            return end + (other - end) * (kTerminalGap / len);
        }
    }
    return end;
}

struct Crossing {
    Point at;
};

std::vector<Crossing> layout_crossings(const std::vector<std::pair<Point, Point>>& wires) {
    std::vector<Crossing> out;
    for (std::size_t i = 0; i < wires.size(); ++i) {
        for (std::size_t j = i + 1; j < wires.size(); ++j) {
            for (const auto& [end, line] : {std::pair{wires[j].first, wires[i]}, std::pair{wires[j].second, wires[i]},
                                            std::pair{wires[i].first, wires[j]}, std::pair{wires[i].second, wires[j]}}) {
                if (segment_distance(end, line.first, line.second) < 0.5 &&
                    distance(end, line.first) > 4.0 && distance(end, line.second) > 4.0) {
                    out.push_back({end});
                }
            }
        }
    }
    return out;
}

class Renderer {
public:
    Renderer(const ScenarioKey& key, const detail::Scenario& scenario, const NoiseParams& noise,
             std::uint64_t seed, const RenderConfig& config)
        : key_(key), scenario_(scenario), noise_(noise), rng_(seed), config_(config) {}

    RenderResult run(const std::vector<InjectedError>& errors) {
        if (key_.domain == Domain::Fbd) {
            build_fbd(errors);
        } else {
            build_circuit(errors);
        }
        jitter();
        rotate();
        return rasterize();
    }

private:
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin() { return std::bernoulli_distribution(0.5)(rng_); }
    double gauss(double sigma) {
        return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng_) : 0.0;
    }

    const RequiredForce& force(const InjectedError& e) const {
        for (const auto& f : key_.required_forces) {
            if (f.name == e.target) return f;
        }
        throw Error("injected " + std::string(to_string(e.error_type)) + " targets unknown force '" +
                    e.target + "'");
    }

    void build_fbd(const std::vector<InjectedError>& errors) {
        struct ArrowPlan {
            std::string name;
            Point tail;
            double dir;
            double len;
            bool drawn = true;
        };
        std::vector<ArrowPlan> plans;
        for (const auto& f : key_.required_forces) plans.push_back({f.name, f.anchor, f.direction_deg, f.magnitude});

        for (const auto& e : errors) {
            if (domain_of(e.error_type) != Domain::Fbd) {
                throw Error("circuit error injected into FBD scenario " + key_.id);
            }
            InjectedError realized = e;
            if (e.error_type == ErrorType::ExtraForce) {
                const auto& x = scenario_.fbd.extra;
                plans.push_back({e.target.empty() ? x.name : e.target, x.anchor, x.direction_deg, x.magnitude});
                realized.detail = fmt_deg("direction", x.direction_deg);
                realized_.push_back(realized);
                continue;
            }
            const auto& f = force(e);
            auto& plan = *std::find_if(plans.begin(), plans.end(), [&](const ArrowPlan& p) { return p.name == f.name; });
            switch (e.error_type) {
                case ErrorType::MissingForce:
                    plan.drawn = false;
                    break;
                case ErrorType::WrongDirection: {
                    const double delta = uniform(90.0, 180.0) * (coin() ? 1.0 : -1.0);
                    plan.dir = normalize_deg(plan.dir + delta);
                    realized.detail = fmt_deg("rotated", delta);
                    break;
                }
                case ErrorType::AnchorError: {
                    const double d = uniform(60.0, 100.0);
                    const Point u = direction_vector(plan.dir);
                    const Point n = Point{-u.y, u.x} * (coin() ? 1.0 : -1.0);
                    plan.tail = plan.tail + n * d;
                    realized.detail = fmt_deg("displaced", d);
                    break;
                }
                default:
                    break;
            }
            realized_.push_back(realized);
        }

        elements_.push_back(body_element(scenario_.fbd.body));
        for (const auto& [a, b] : scenario_.fbd.decorations) {
            elements_.push_back(Element{std::nullopt, {seg(a, b)}});
        }
        for (const auto& p : plans) {
            if (!p.drawn) continue;
            elements_.push_back(arrow_element(p.name, p.tail, p.tail + direction_vector(p.dir) * p.len));
        }
    }

    void build_circuit(const std::vector<InjectedError>& errors) {
        const auto& layout = scenario_.circuit;
        std::vector<bool> part_drawn(layout.components.size(), true);
        std::vector<double> part_orient;
        for (const auto& c : layout.components) part_orient.push_back(c.orientation);
        std::vector<bool> wire_drawn(layout.wires.size(), true);
        std::vector<Point> dots = layout.dots;
        bool ground_drawn = layout.ground.has_value();

        auto part_index = [&](const std::string& id) -> std::size_t {
            for (std::size_t i = 0; i < layout.components.size(); ++i) {
                if (layout.components[i].id == id) return i;
            }
            throw Error("injected error targets unknown component '" + id + "' in " + key_.id);
        };

        for (const auto& e : errors) {
            if (domain_of(e.error_type) != Domain::Circuit) {
                throw Error("FBD error injected into circuit scenario " + key_.id);
            }
            InjectedError realized = e;
            switch (e.error_type) {
                case ErrorType::MissingComponent:
                    part_drawn[part_index(e.target)] = false;
                    break;
                case ErrorType::WrongPolarity: {
                    const auto* kc = key_.find_component(e.target);
                    if (!kc || !kc->polarity_deg) {
                        throw Error("wrong polarity needs a polar component, got '" + e.target + "'");
                    }
                    auto& o = part_orient[part_index(e.target)];
                    o = normalize_deg(o + 180.0);
                    realized.detail = "rotated=180.0";
                    break;
                }
                case ErrorType::OpenCircuit: {
                    int wire = -1;
                    if (e.detail.rfind("wire=w", 0) == 0) {
                        wire = std::stoi(e.detail.substr(6));
                    } else {
                        for (const auto& c : layout.open_candidates) {
                            if (c.target == e.target) {
                                wire = c.wire;
                                break;
                            }
                        }
                    }
                    if (wire < 0 || wire >= static_cast<int>(layout.wires.size())) {
                        throw Error("open circuit has no removable wire for '" + e.target + "'");
                    }
                    wire_drawn[static_cast<std::size_t>(wire)] = false;
                    realized.detail = "wire=w" + std::to_string(wire);
                    break;
                }
                case ErrorType::MissingGround:
                    if (!key_.requires_ground) throw Error("missing ground injected into ungrounded " + key_.id);
                    ground_drawn = false;
                    break;
                case ErrorType::IllegalJunction:
                    if (!key_.crossing_wires_connected) {
                        throw Error("illegal junction needs crossing semantics in " + key_.id);
                    }
                    if (*key_.crossing_wires_connected) {
                        if (dots.empty()) throw Error("no junction dot to remove in " + key_.id);
                        dots.erase(dots.begin());
                        realized.detail = "dot=removed";
                    } else {
                        const auto crossings = layout_crossings(layout.wires);
                        if (crossings.empty()) throw Error("no crossing to mark in " + key_.id);
                        dots.push_back(crossings.front().at);
                        realized.detail = "dot=added";
                    }
                    break;
                default:
                    break;
            }
            realized_.push_back(realized);
        }

        std::vector<Point> terminals;
        for (const auto& c : layout.components) {
            const Point f = direction_vector(c.orientation);
            terminals.push_back(c.center + f * kSymbolHalfSpan);
            terminals.push_back(c.center - f * kSymbolHalfSpan);
        }
        if (layout.ground) terminals.push_back(detail::ground_terminal(*layout.ground));

        for (std::size_t i = 0; i < layout.components.size(); ++i) {
            if (part_drawn[i]) elements_.push_back(component_element(layout.components[i], part_orient[i]));
        }
        if (ground_drawn) elements_.push_back(ground_element(*layout.ground));
        for (std::size_t i = 0; i < layout.wires.size(); ++i) {
            if (!wire_drawn[i]) continue;
            const auto [a, b] = layout.wires[i];
            elements_.push_back(wire_element(static_cast<int>(i), trim_endpoint(a, b, terminals),
                                             trim_endpoint(b, a, terminals)));
        }
        for (std::size_t i = 0; i < dots.size(); ++i) {
            elements_.push_back(junction_element(static_cast<int>(i), dots[i]));
        }
    }

    // Free strokes (arrows, wires) wobble per endpoint; symbols shift rigidly.
    void jitter() {
        const double sigma = noise_.stroke_jitter_sigma();
        if (sigma <= 0.0) return;
        for (auto& e : elements_) {
            const bool per_endpoint = e.proto && (e.proto->kind == PrimitiveKind::Wire ||
                                                  e.proto->kind == PrimitiveKind::ForceArrow);
            if (per_endpoint) {
                auto [a, b] = *e.proto->endpoints;
                a = a + Point{gauss(sigma), gauss(sigma)};
                b = b + Point{gauss(sigma), gauss(sigma)};
                if (e.proto->kind == PrimitiveKind::ForceArrow) {
                    const auto label = *e.proto->label;
                    e = arrow_element(label, a, b);
                } else {
                    e.shapes = {seg(a, b)};
                    e.proto->endpoints = std::make_pair(a, b);
                }
            } else {
                const Point shift{gauss(sigma), gauss(sigma)};
                map_points(e, [&](Point p) { return p + shift; });
            }
        }
    }

    void rotate() {
        const double rmax = noise_.rotation_max_deg();
        theta_ = rmax > 0.0 ? uniform(-rmax, rmax) : 0.0;
        if (theta_ == 0.0) return;
        const double rad = theta_ * std::numbers::pi / 180.0;
        const double c = std::cos(rad), s = std::sin(rad);
        const Point center{config_.width / 2.0, config_.height / 2.0};
        for (auto& e : elements_) {
            map_points(e, [&](Point p) {
                const Point d = p - center;
                return Point{center.x + d.x * c + d.y * s, center.y - d.x * s + d.y * c};
            });
            if (e.proto && e.proto->orientation) {
                e.proto->orientation = normalize_deg(*e.proto->orientation + theta_);
            }
        }
    }

    RenderResult rasterize() {
        const double half_w = config_.stroke_width / 2.0;
        RenderResult out;
        out.stroke_mask = BinaryMap(config_.width, config_.height, 0);
        out.owner.assign(static_cast<std::size_t>(config_.width) * config_.height, -1);

        for (auto& e : elements_) {
            int gt_index = -1;
            if (e.proto) {
                Primitive p = *e.proto;
                BBox box = shape_bounds(e.shapes.front(), half_w);
                for (const auto& s : e.shapes) box = box.united(shape_bounds(s, half_w));
                p.bbox = box;
                if (p.kind == PrimitiveKind::ForceArrow || p.kind == PrimitiveKind::Wire) {
                    p.orientation = orientation_of(p.endpoints->first, p.endpoints->second);
                }
                gt_index = static_cast<int>(out.gt_primitives.size());
                out.gt_primitives.push_back(p);
            }
            for (const auto& s : e.shapes) {
                const BBox b = shape_bounds(s, half_w);
                const int x0 = std::max(0, static_cast<int>(std::floor(b.x_min)) - 1);
                const int y0 = std::max(0, static_cast<int>(std::floor(b.y_min)) - 1);
                const int x1 = std::min(config_.width - 1, static_cast<int>(std::ceil(b.x_max)) + 1);
                const int y1 = std::min(config_.height - 1, static_cast<int>(std::ceil(b.y_max)) + 1);
                for (int y = y0; y <= y1; ++y) {
                    for (int x = x0; x <= x1; ++x) {
                        if (shape_covers(s, {x + 0.5, y + 0.5}, half_w)) {
                            out.stroke_mask.at(x, y) = 1;
                            out.owner[static_cast<std::size_t>(y) * config_.width + x] = gt_index;
                        }
                    }
                }
            }
        }

        const double bmax = noise_.brightness_max();
        const double brightness = bmax > 0.0 ? uniform(-bmax, bmax) : 0.0;
        const double sigma = noise_.pixel_noise_sigma();
        out.image = GrayImage(config_.width, config_.height, config_.background);
        for (std::size_t i = 0; i < out.image.pixels.size(); ++i) {
            const double base = out.stroke_mask.pixels[i] ? config_.stroke : config_.background;
            const double v = base + brightness + gauss(sigma);
            out.image.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
        out.realized_errors = realized_;
        return out;
    }

    const ScenarioKey& key_;
    const detail::Scenario& scenario_;
    NoiseParams noise_;
    std::mt19937_64 rng_;
    RenderConfig config_;
    std::vector<Element> elements_;
    std::vector<InjectedError> realized_;
    double theta_ = 0.0;
};

}  // namespace

RenderResult render_sample(const ScenarioKey& key, const std::vector<InjectedError>& errors,
                           const NoiseParams& noise, std::uint64_t seed, const RenderConfig& config) {
    const auto* scenario = detail::find(key.id);
    if (!scenario) throw Error("no drawing for scenario '" + key.id + "'");
    validate(key);
    return Renderer(key, *scenario, noise, seed, config).run(errors);
}

}  // namespace dgf::synth
