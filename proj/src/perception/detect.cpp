#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgf/perception.hpp"

namespace dgf {
namespace {

using vision::Blob;
using vision::Pixel;
using vision::Segment;

// Logistic margin: 0.5 at the threshold, rising as x clears it.
double above(double x, double threshold, double scale) {
    return 1.0 / (1.0 + std::exp(-(x - threshold) / scale));
}
double below(double x, double threshold, double scale) { return above(threshold, x, scale); }

double confidence_from(std::initializer_list<double> margins) {
    double log_sum = 0.0;
    for (double m : margins) log_sum += std::log(std::max(m, 1e-6));
    return std::clamp(std::exp(log_sum / static_cast<double>(margins.size())), 0.10, 0.99);
}

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

Point mean_of(const std::vector<Pixel>& px) {
    Point s;
    for (const auto& p : px) s = s + p.center();
    return s * (1.0 / static_cast<double>(px.size()));
}

bool has_hole(const Blob& b, const ComponentFilter& f) {
    return std::any_of(b.holes.begin(), b.holes.end(),
                       [&](const vision::Hole& h) { return h.pixels.size() >= f.hole_min_pixels; });
}

// ---------------------------------------------------------------- arrows

std::optional<Primitive> arrow_from_blob(const Blob& b, const PerceptionConfig& cfg) {
    const auto& f = cfg.arrow;
    if (b.area() < f.area_min || b.area() > f.area_max) return std::nullopt;
    if (b.solidity < f.solidity_min || b.solidity > f.solidity_max) return std::nullopt;
    if (has_hole(b, cfg.component)) return std::nullopt;
    const auto ax = vision::principal_axes(b.pixels);
    const double elongation = ax.length() / ax.width();
    if (elongation < f.elongation_min) return std::nullopt;

    const double quarter = (ax.t_max - ax.t_min) / 4.0;
    double low = 0, high = 0;
    std::vector<Pixel> low_end, high_end;
    for (const auto& p : b.pixels) {
        const double t = dot(p.center() - ax.centroid, ax.major);
        if (t <= ax.t_min + quarter) ++low;
        if (t >= ax.t_max - quarter) ++high;
        if (t <= ax.t_min + 1.5) low_end.push_back(p);
        if (t >= ax.t_max - 1.5) high_end.push_back(p);
    }
    const double ratio = std::max(low, high) / std::max(1.0, std::min(low, high));
    if (ratio < f.head_mass_ratio_min) return std::nullopt;
    const bool head_high = high >= low;
    const Point tail = mean_of(head_high ? low_end : high_end);
    const Point tip = mean_of(head_high ? high_end : low_end);

    Primitive p;
    p.kind = PrimitiveKind::ForceArrow;
    p.bbox = b.bbox;
    p.endpoints = std::make_pair(tail, tip);
    p.orientation = orientation_of(tail, tip);
    p.confidence = confidence_from({above(b.solidity, f.solidity_min, 0.05),
                                    below(b.solidity, f.solidity_max, 0.05),
                                    above(elongation, f.elongation_min, 1.0),
                                    above(ratio, f.head_mass_ratio_min, 0.3)});
    return p;
}

// ------------------------------------------------------------ components

struct Cluster {
    std::vector<std::size_t> parts;  // indices into the blob list, largest first
    BBox bbox;
};

std::vector<Cluster> cluster_blobs(const std::vector<Blob>& blobs, const std::vector<bool>& eligible,
                                   double gap) {
    std::vector<std::size_t> parent(blobs.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        if (!eligible[i]) continue;
        for (std::size_t j = i + 1; j < blobs.size(); ++j) {
            if (eligible[j] && bbox_gap(blobs[i].bbox, blobs[j].bbox) <= gap) parent[find(j)] = find(i);
        }
    }
    std::vector<Cluster> out;
    std::vector<int> slot(blobs.size(), -1);
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        if (!eligible[i]) continue;
        const std::size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(out.size());
            out.push_back({{}, blobs[i].bbox});
        }
        auto& c = out[static_cast<std::size_t>(slot[r])];
        c.parts.push_back(i);
        c.bbox = c.bbox.united(blobs[i].bbox);
    }
    for (auto& c : out) {
        std::stable_sort(c.parts.begin(), c.parts.end(),
                         [&](std::size_t a, std::size_t b) { return blobs[a].area() > blobs[b].area(); });
    }
    return out;
}

// Largest filled core left after eroding one blob; empty when none survives.
std::vector<Pixel> filled_core(const Blob& b, int kernel) {
    const int ox = static_cast<int>(b.bbox.x_min) - kernel, oy = static_cast<int>(b.bbox.y_min) - kernel;
    BinaryMap local(static_cast<int>(b.bbox.width()) + 2 * kernel, static_cast<int>(b.bbox.height()) + 2 * kernel, 0);
    for (const auto& p : b.pixels) local.at(p.x - ox, p.y - oy) = 1;
    std::vector<Pixel> best;
    for (auto& comp : vision::label_pixels(vision::erode(local, kernel), true, true)) {
        if (comp.size() > best.size()) best = std::move(comp);
    }
    for (auto& p : best) p = {p.x + ox, p.y + oy};
    return best;
}

double axis_angle(Point major) { return normalize_deg(orientation_of({0, 0}, major)); }

Primitive make_component(ComponentKind kind, const Cluster& c, double orientation, double confidence) {
    Primitive p;
    p.kind = PrimitiveKind::Component;
    p.component_kind = kind;
    p.bbox = c.bbox;
    p.orientation = normalize_deg(orientation);
    p.confidence = confidence;
    return p;
}

std::optional<Primitive> classify_cluster(const Cluster& c, const std::vector<Blob>& blobs,
                                          const ComponentFilter& f) {
    const double area = c.bbox.area();
    if (area < f.area_min || area > f.area_max) return std::nullopt;
    const double area_margin = std::min(above(area, f.area_min, 50.0), below(area, f.area_max, 500.0));
    const Blob& main = blobs[c.parts.front()];
    const auto main_axes = vision::principal_axes(main.pixels);

    // Closed outline: round -> current source, elongated -> resistor.
    const vision::Hole* hole = nullptr;
    for (const auto& h : main.holes) {
        if (h.pixels.size() >= f.hole_min_pixels && (!hole || h.pixels.size() > hole->pixels.size())) hole = &h;
    }
    if (hole) {
        if (hole->circularity >= f.source_circularity_min) {
            double orient = axis_angle(main_axes.major);
            // Direction comes from the inner arrow when it survived thresholding.
            for (std::size_t k = 1; k < c.parts.size(); ++k) {
                const Blob& inner = blobs[c.parts[k]];
                if (!hole->bbox.expanded(1.0).contains(inner.centroid)) continue;
                const auto ax = vision::principal_axes(inner.pixels);
                const Point across{-ax.major.y, ax.major.x};
                const double mid = (ax.t_min + ax.t_max) / 2.0;
                double lo = 0, hi = 0;
                for (const auto& p : inner.pixels) {
                    const Point d = p.center() - ax.centroid;
                    const double s = dot(d, across);
                    (dot(d, ax.major) < mid ? lo : hi) += s * s;
                }
                // The head half spreads wider across the shaft.
                const Point fwd = hi >= lo ? ax.major : ax.major * -1.0;
                orient = axis_angle(fwd);
                break;
            }
            return make_component(ComponentKind::CurrentSource, c, orient,
                                  confidence_from({above(hole->circularity, f.source_circularity_min, 0.04),
                                                   area_margin}));
        }
        if (hole->aspect >= f.resistor_aspect_min) {
            return make_component(ComponentKind::Resistor, c, axis_angle(main_axes.major),
                                  confidence_from({above(hole->aspect, f.resistor_aspect_min, 0.2),
                                                   below(hole->circularity, f.source_circularity_min, 0.04),
                                                   area_margin}));
        }
        return std::nullopt;
    }

    // Filled triangle in the middle of the leads -> diode, with ticks -> LED.
    const auto core = filled_core(main, f.core_kernel);
    if (static_cast<int>(core.size()) >= f.core_min_pixels) {
        const Point core_c = mean_of(core);
        const double t_core = dot(core_c - main_axes.centroid, main_axes.major);
        const double mid = (main_axes.t_min + main_axes.t_max) / 2.0;
        const double span = main_axes.t_max - main_axes.t_min;
        if (std::abs(t_core - mid) <= 0.25 * span) {
            // The triangle's mass sits behind the bar, so forward points away from the core.
            const Point fwd = t_core <= mid ? main_axes.major : main_axes.major * -1.0;
            const bool ticks = c.parts.size() >= 2;
            return make_component(ticks ? ComponentKind::Led : ComponentKind::Diode, c, axis_angle(fwd),
                                  confidence_from({above(static_cast<double>(core.size()), f.core_min_pixels, 6.0),
                                                   below(std::abs(t_core - mid), 0.25 * span, 2.0),
                                                   area_margin}));
        }
    }

    if (c.parts.size() >= 3) {
        // Ground: stacked parallel bars, each shorter and farther from the lead.
        std::vector<vision::Axes> ax;
        for (std::size_t k : c.parts) ax.push_back(vision::principal_axes(blobs[k].pixels));
        const Point bar_dir = ax.front().major;
        const Point normal{-bar_dir.y, bar_dir.x};
        std::vector<std::size_t> order(ax.size());
        std::iota(order.begin(), order.end(), 0);
        const Point origin = ax.front().centroid;
        const double side = dot(ax.back().centroid - origin, normal) >= 0 ? 1.0 : -1.0;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return side * dot(ax[a].centroid - origin, normal) < side * dot(ax[b].centroid - origin, normal);
        });
        bool stacked = order.front() == 0;
        double worst_parallel = 0.0;
        for (std::size_t k = 1; k < order.size() && stacked; ++k) {
            const auto& prev = ax[order[k - 1]];
            const auto& cur = ax[order[k]];
            const double cosang = std::abs(dot(cur.major, bar_dir));
            worst_parallel = std::max(worst_parallel, std::acos(std::min(1.0, cosang)) * 180.0 / 3.14159265358979);
            stacked = worst_parallel <= 20.0 && cur.length() < prev.length();
        }
        if (stacked) {
            Primitive p;
            p.kind = PrimitiveKind::GroundSymbol;
            p.bbox = c.bbox;
            p.orientation = axis_angle(normal * side);
            p.confidence = confidence_from({below(worst_parallel, 20.0, 4.0), area_margin});
            return p;
        }
    }

    if (c.parts.size() >= 2) {
        // Two lead+plate halves facing each other.
        const Blob& a = blobs[c.parts[0]];
        const Blob& b = blobs[c.parts[1]];
        if (b.area() < 0.4 * a.area()) return std::nullopt;
        const Point d = b.centroid - a.centroid;
        const double len = std::hypot(d.x, d.y);
        if (len < 1.0) return std::nullopt;
        const Point u = d * (1.0 / len);
        const Point n{-u.y, u.x};
        auto extent = [&](const Blob& blob, Point dir) {
            double lo = 1e18, hi = -1e18;
            for (const auto& p : blob.pixels) {
                const double s = dot(p.center(), dir);
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            return hi - lo + 1.0;
        };
        const double plate_a = extent(a, n), plate_b = extent(b, n);
        if (std::min(plate_a, plate_b) < 8.0 || extent(a, u) < 12.0 || extent(b, u) < 12.0) return std::nullopt;
        const double ratio = std::max(plate_a, plate_b) / std::min(plate_a, plate_b);
        if (ratio > f.battery_plate_ratio_min) {
            // Points from the short plate toward the long one.
            const Point fwd = plate_b > plate_a ? u : u * -1.0;
            return make_component(ComponentKind::Battery, c, axis_angle(fwd),
                                  confidence_from({above(ratio, f.battery_plate_ratio_min, 0.1), area_margin}));
        }
        return make_component(ComponentKind::Capacitor, c, axis_angle(u),
                              confidence_from({below(ratio, f.battery_plate_ratio_min, 0.1), area_margin}));
    }
    return std::nullopt;
}

struct ComponentHits {
    std::vector<Primitive> prims;
    std::vector<std::vector<std::size_t>> parts;  // blob indices behind each primitive
};

ComponentHits find_components(const std::vector<Blob>& blobs, const std::vector<bool>& eligible,
                              const PerceptionConfig& cfg) {
    std::vector<bool> usable = eligible;
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        if (blobs[i].bbox.area() > cfg.component.area_max ||
            static_cast<int>(blobs[i].area()) < cfg.component.min_part_pixels) {
            usable[i] = false;
        }
    }
    ComponentHits hits;
    for (const auto& c : cluster_blobs(blobs, usable, cfg.component.cluster_gap)) {
        if (auto p = classify_cluster(c, blobs, cfg.component)) {
            hits.prims.push_back(*p);
            hits.parts.push_back(c.parts);
        }
    }
    return hits;
}

// ----------------------------------------------------------------- wires

double angle_mod180(const Segment& s) {
    return std::fmod(normalize_deg(orientation_of(s.a, s.b)), 180.0);
}

double line_distance(Point p, const Segment& s) {
    const Point d = s.b - s.a;
    const double len = s.length();
    if (len <= 0) return distance(p, s.a);
    return std::abs(d.x * (p.y - s.a.y) - d.y * (p.x - s.a.x)) / len;
}

std::vector<Segment> merge_collinear(std::vector<Segment> segs, const PerceptionConfig& cfg) {
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < segs.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < segs.size() && !merged; ++j) {
                Segment& L = segs[i].length() >= segs[j].length() ? segs[i] : segs[j];
                const Segment& S = &L == &segs[i] ? segs[j] : segs[i];
                const double da = std::abs(angle_mod180(L) - angle_mod180(S));
                if (std::min(da, 180.0 - da) > cfg.wire_merge_angle_deg) continue;
                if (line_distance(S.a, L) > cfg.wire_merge_distance || line_distance(S.b, L) > cfg.wire_merge_distance) {
                    continue;
                }
                const Point u = (L.b - L.a) * (1.0 / L.length());
                const double t0 = 0.0, t1 = L.length();
                const double s0 = dot(S.a - L.a, u), s1 = dot(S.b - L.a, u);
                const double lo = std::min(s0, s1), hi = std::max(s0, s1);
                if (lo > t1 + cfg.hough.max_gap || hi < t0 - cfg.hough.max_gap) continue;
                const double nlo = std::min(t0, lo), nhi = std::max(t1, hi);
                const Point base = L.a;
                L = {base + u * nlo, base + u * nhi};
                segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(&S - segs.data()));
                merged = true;
            }
        }
    }
    return segs;
}

std::vector<Segment> suppress_overlaps(std::vector<Segment> segs, const PerceptionConfig& cfg) {
    std::stable_sort(segs.begin(), segs.end(),
                     [](const Segment& a, const Segment& b) { return a.length() > b.length(); });
    std::vector<Segment> kept;
    for (const auto& s : segs) {
        const int n = std::max(2, static_cast<int>(s.length()));
        int covered = 0;
        for (int i = 0; i <= n; ++i) {
            const Point p = s.a + (s.b - s.a) * (static_cast<double>(i) / n);
            for (const auto& k : kept) {
                if (vision::point_segment_distance(p, k) <= cfg.wire_merge_distance) {
                    ++covered;
                    break;
                }
            }
        }
        if (covered < cfg.wire_overlap_suppress * (n + 1)) kept.push_back(s);
    }
    return kept;
}

double ink_support(const BinaryMap& map, const Segment& s) {
    const int n = std::max(2, static_cast<int>(s.length()));
    int hit = 0;
    for (int i = 0; i <= n; ++i) {
        const Point p = s.a + (s.b - s.a) * (static_cast<double>(i) / n);
        const int x = static_cast<int>(std::floor(p.x)), y = static_cast<int>(std::floor(p.y));
        bool found = false;
        for (int dy = -1; dy <= 1 && !found; ++dy) {
            for (int dx = -1; dx <= 1 && !found; ++dx) {
                found = map.in_bounds(x + dx, y + dy) && map.at(x + dx, y + dy);
            }
        }
        hit += found;
    }
    return static_cast<double>(hit) / (n + 1);
}

}  // namespace

void PerceptionConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw Error(std::string("perception config: ") + name + " must be positive");
    };
    positive(clahe_clip_limit, "clahe_clip_limit");
    positive(clahe_tiles, "clahe_tiles");
    positive(adaptive_block, "adaptive_block");
    positive(adaptive_offset, "adaptive_offset");
    positive(arrow.area_min, "arrow.area_min");
    positive(arrow.area_max, "arrow.area_max");
    positive(arrow.solidity_min, "arrow.solidity_min");
    positive(arrow.solidity_max, "arrow.solidity_max");
    positive(arrow.elongation_min, "arrow.elongation_min");
    positive(hough.rho, "hough.rho");
    positive(hough.theta_deg, "hough.theta_deg");
    positive(hough.votes, "hough.votes");
    positive(hough.min_length, "hough.min_length");
    positive(component.area_min, "component.area_min");
    positive(component.area_max, "component.area_max");
    positive(junction.area_min, "junction.area_min");
    positive(junction.area_max, "junction.area_max");
    positive(junction.circularity_min, "junction.circularity_min");
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw Error("perception config: nms_iou must be in (0, 1]");
    if (adaptive_block % 2 == 0) throw Error("perception config: adaptive_block must be odd");
}

BinaryMap preprocess(const GrayImage& img, const PerceptionConfig& cfg) {
    if (img.empty()) throw Error("preprocess: empty image");
    const GrayImage smooth = vision::gaussian_blur(img, cfg.denoise_sigma);
    const GrayImage eq = vision::clahe(smooth, cfg.clahe_clip_limit, cfg.clahe_tiles, cfg.clahe_tiles);
    const BinaryMap bin = vision::adaptive_threshold(eq, cfg.adaptive_block, cfg.adaptive_offset);
    return vision::remove_small(bin, cfg.speckle_min_pixels);
}

std::vector<Primitive> detect_arrows(const BinaryMap& map, const PerceptionConfig& cfg) {
    std::vector<Primitive> out;
    for (const auto& b : vision::label_components(map, cfg.speckle_min_pixels)) {
        if (auto p = arrow_from_blob(b, cfg)) out.push_back(*p);
    }
    return out;
}

std::vector<Primitive> detect_components(const BinaryMap& map, const PerceptionConfig& cfg) {
    const auto blobs = vision::label_components(map, cfg.speckle_min_pixels);
    std::vector<bool> eligible(blobs.size(), true);
    for (std::size_t i = 0; i < blobs.size(); ++i) eligible[i] = !arrow_from_blob(blobs[i], cfg).has_value();
    return find_components(blobs, eligible, cfg).prims;
}

std::vector<Primitive> detect_wires(const BinaryMap& map, const PerceptionConfig& cfg) {
    const BinaryMap skeleton = vision::thin(map);
    auto segs = vision::hough_segments(skeleton, cfg.hough);
    segs = suppress_overlaps(merge_collinear(std::move(segs), cfg), cfg);
    std::vector<Primitive> out;
    for (auto s : segs) {
        if (s.length() < cfg.hough.min_length) continue;
        if (s.b.x < s.a.x || (s.b.x == s.a.x && s.b.y < s.a.y)) std::swap(s.a, s.b);
        const double support = ink_support(map, s);
        Primitive p;
        p.kind = PrimitiveKind::Wire;
        p.endpoints = std::make_pair(s.a, s.b);
        p.bbox = BBox::around({s.a, s.b}, 1.0);
        p.orientation = orientation_of(s.a, s.b);
        p.confidence = confidence_from({above(s.length(), cfg.hough.min_length, 10.0), above(support, 0.6, 0.1)});
        out.push_back(p);
    }
    return out;
}

std::vector<Primitive> detect_junctions(const BinaryMap& map, const std::vector<Primitive>& wires,
                                        const PerceptionConfig& cfg) {
    const auto& f = cfg.junction;
    std::vector<Segment> segs;
    for (const auto& w : wires) {
        if (w.is(PrimitiveKind::Wire) && w.endpoints) segs.push_back({w.endpoints->first, w.endpoints->second});
    }
    std::vector<Primitive> out;
    if (segs.size() < 2) return out;
    for (const auto& b : vision::label_components(vision::open(map, f.open_kernel))) {
        if (b.area() < f.area_min || b.area() > f.area_max || b.circularity < f.circularity_min) continue;
        int near = 0;
        for (const auto& s : segs) near += vision::point_segment_distance(b.centroid, s) <= f.wire_distance;
        if (near < 2) continue;
        Primitive p;
        p.kind = PrimitiveKind::Junction;
        p.bbox = b.bbox;
        p.confidence = confidence_from({above(b.circularity, f.circularity_min, 0.05),
                                        above(b.area(), f.area_min, 5.0), below(b.area(), f.area_max, 8.0)});
        out.push_back(p);
    }
    return out;
}

std::vector<Primitive> nms(std::vector<Primitive> detections, double iou_threshold) {
    std::stable_sort(detections.begin(), detections.end(),
                     [](const Primitive& a, const Primitive& b) { return a.confidence > b.confidence; });
    std::vector<Primitive> kept;
    for (const auto& d : detections) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Primitive& k) {
            return k.kind == d.kind && k.component_kind == d.component_kind && iou(k.bbox, d.bbox) >= iou_threshold;
        });
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<Primitive> detect_all(const GrayImage& img, const PerceptionConfig& cfg) {
    cfg.validate();
    const BinaryMap map = preprocess(img, cfg);
    const auto blobs = vision::label_components(map, cfg.speckle_min_pixels);

    std::vector<Primitive> arrows;
    std::vector<bool> not_arrow(blobs.size(), true);
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        if (auto p = arrow_from_blob(blobs[i], cfg)) {
            arrows.push_back(*p);
            not_arrow[i] = false;
        }
    }
    const auto comps = find_components(blobs, not_arrow, cfg);

    BinaryMap wire_map = map;
    auto erase = [&](std::size_t i) {
        for (const auto& p : blobs[i].pixels) wire_map.at(p.x, p.y) = 0;
    };
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        if (!not_arrow[i]) erase(i);
    }
    for (const auto& parts : comps.parts) {
        for (std::size_t i : parts) erase(i);
    }
    const auto wires = detect_wires(wire_map, cfg);
    const auto junctions = detect_junctions(wire_map, wires, cfg);

    if (cfg.debug_dir) {
        std::filesystem::create_directories(*cfg.debug_dir);
        auto scaled = [](BinaryMap m) {
            for (auto& v : m.pixels) v = v ? 0 : 255;
            return m;
        };
        write_png(scaled(map), *cfg.debug_dir / "foreground.png");
        write_png(scaled(wire_map), *cfg.debug_dir / "wire_map.png");
        write_png(scaled(vision::thin(wire_map)), *cfg.debug_dir / "skeleton.png");
    }

    std::vector<Primitive> out;
    for (auto& group : {nms(arrows, cfg.nms_iou), nms(comps.prims, cfg.nms_iou), wires, nms(junctions, cfg.nms_iou)}) {
        out.insert(out.end(), group.begin(), group.end());
    }
    return out;
}

}  // namespace dgf
