#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "dgf/vision.hpp"

namespace dgf::vision {
namespace {

// Clockwise in raster coordinates, starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_to(Pixel from, Pixel to) {
    for (int d = 0; d < 8; ++d) {
        if (from.x + kDx[d] == to.x && from.y + kDy[d] == to.y) return d;
    }
    return 4;
}

}  // namespace

std::vector<std::vector<Pixel>> label_pixels(const BinaryMap& m, bool eight, bool value) {
    std::vector<std::vector<Pixel>> out;
    std::vector<std::uint8_t> seen(m.pixels.size(), 0);
    std::vector<Pixel> stack;
    const int n_dirs = eight ? 8 : 4;
    constexpr int dx4[4] = {1, 0, -1, 0}, dy4[4] = {0, 1, 0, -1};
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * m.width + x;
            if (seen[i] || (m.pixels[i] != 0) != value) continue;
            std::vector<Pixel> comp;
            seen[i] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                comp.push_back(p);
                for (int d = 0; d < n_dirs; ++d) {
                    const int nx = p.x + (eight ? kDx[d] : dx4[d]);
                    const int ny = p.y + (eight ? kDy[d] : dy4[d]);
                    if (!m.in_bounds(nx, ny)) continue;
                    const std::size_t j = static_cast<std::size_t>(ny) * m.width + nx;
                    if (seen[j] || (m.pixels[j] != 0) != value) continue;
                    seen[j] = 1;
                    stack.push_back({nx, ny});
                }
            }
            out.push_back(std::move(comp));
        }
    }
    return out;
}

namespace {

BBox pixel_bounds(const std::vector<Pixel>& pixels) {
    BBox b{1e18, 1e18, -1e18, -1e18};
    for (const auto& p : pixels) {
        b.x_min = std::min<double>(b.x_min, p.x);
        b.y_min = std::min<double>(b.y_min, p.y);
        b.x_max = std::max<double>(b.x_max, p.x + 1);
        b.y_max = std::max<double>(b.y_max, p.y + 1);
    }
    return b;
}

double circularity_of(double area, double perimeter) {
    if (perimeter <= 0.0) return 1.0;
    return std::min(1.0, 4.0 * std::numbers::pi * area / (perimeter * perimeter));
}

// Region shape measured on a local mask (pixels shifted by origin).
double region_circularity(const std::vector<Pixel>& pixels, const BBox& box) {
    const int ox = static_cast<int>(box.x_min) - 1, oy = static_cast<int>(box.y_min) - 1;
    BinaryMap local(static_cast<int>(box.width()) + 2, static_cast<int>(box.height()) + 2, 0);
    Pixel first{1 << 30, 1 << 30};
    for (const auto& p : pixels) {
        local.at(p.x - ox, p.y - oy) = 1;
        if (p.y < first.y || (p.y == first.y && p.x < first.x)) first = p;
    }
    const auto chain = trace_contour(local, {first.x - ox, first.y - oy});
    return circularity_of(static_cast<double>(pixels.size()), chain_length(chain));
}

std::vector<Hole> find_holes(const std::vector<Pixel>& pixels, const BBox& box) {
    const int ox = static_cast<int>(box.x_min) - 1, oy = static_cast<int>(box.y_min) - 1;
    BinaryMap local(static_cast<int>(box.width()) + 2, static_cast<int>(box.height()) + 2, 0);
    for (const auto& p : pixels) local.at(p.x - ox, p.y - oy) = 1;
    std::vector<Hole> holes;
    for (auto& region : label_pixels(local, false, false)) {
        const bool touches = std::any_of(region.begin(), region.end(), [&](const Pixel& p) {
            return p.x == 0 || p.y == 0 || p.x == local.width - 1 || p.y == local.height - 1;
        });
        if (touches) continue;
        for (auto& p : region) p = {p.x + ox, p.y + oy};
        Hole h;
        h.bbox = pixel_bounds(region);
        h.circularity = region_circularity(region, h.bbox);
        h.aspect = std::max(h.bbox.width(), h.bbox.height()) / std::min(h.bbox.width(), h.bbox.height());
        h.pixels = std::move(region);
        holes.push_back(std::move(h));
    }
    return holes;
}

}  // namespace

std::vector<Pixel> trace_contour(const BinaryMap& m, Pixel start) {
    auto fg = [&](int x, int y) { return m.in_bounds(x, y) && m.at(x, y) != 0; };
    if (!fg(start.x, start.y)) throw Error("trace_contour: start pixel is background");
    std::vector<Pixel> chain{start};
    Pixel c = start;
    Pixel b{start.x - 1, start.y};  // west of the first raster pixel is background
    std::optional<Pixel> second;
    const std::size_t guard = 4 * m.pixels.size() + 16;
    for (std::size_t step = 0; step < guard; ++step) {
        const int db = direction_to(c, b);
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (db + k) % 8;
            if (fg(c.x + kDx[d], c.y + kDy[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) return chain;  // isolated pixel
        const int prev = (found + 7) % 8;
        const Pixel next{c.x + kDx[found], c.y + kDy[found]};
        b = {c.x + kDx[prev], c.y + kDy[prev]};
        if (c == start && second && next == *second) {
            chain.pop_back();
            return chain;
        }
        if (!second) second = next;
        c = next;
        chain.push_back(c);
    }
    return chain;
}

double chain_length(const std::vector<Pixel>& chain) {
    if (chain.size() < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Pixel& a = chain[i];
        const Pixel& b = chain[(i + 1) % chain.size()];
        len += (a.x != b.x && a.y != b.y) ? std::numbers::sqrt2 : 1.0;
    }
    return len;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(const std::vector<Point>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return std::abs(a) / 2.0;
}

std::vector<Blob> label_components(const BinaryMap& m, int min_pixels) {
    std::vector<Blob> blobs;
    for (auto& comp : label_pixels(m, true, true)) {
        if (static_cast<int>(comp.size()) < min_pixels) continue;
        Blob b;
        b.pixels = std::move(comp);
        b.bbox = pixel_bounds(b.pixels);
        double sx = 0, sy = 0;
        for (const auto& p : b.pixels) {
            sx += p.x + 0.5;
            sy += p.y + 0.5;
        }
        b.centroid = {sx / b.area(), sy / b.area()};
        b.contour = trace_contour(m, b.pixels.front());
        b.perimeter = chain_length(b.contour);
        b.circularity = circularity_of(b.area(), b.perimeter);
        std::vector<Point> pts;
        pts.reserve(b.contour.size());
        for (const auto& p : b.contour) pts.push_back(p.center());
        const double hull_area = polygon_area(convex_hull(std::move(pts)));
        b.solidity = hull_area > 0.0 ? std::min(1.0, b.area() / hull_area) : 1.0;
        b.holes = find_holes(b.pixels, b.bbox);
        blobs.push_back(std::move(b));
    }
    return blobs;
}

Axes principal_axes(const std::vector<Pixel>& pixels) {
    Axes ax;
    if (pixels.empty()) return ax;
    double sx = 0, sy = 0;
    for (const auto& p : pixels) {
        sx += p.x + 0.5;
        sy += p.y + 0.5;
    }
    const double n = static_cast<double>(pixels.size());
    ax.centroid = {sx / n, sy / n};
    double cxx = 0, cyy = 0, cxy = 0;
    for (const auto& p : pixels) {
        const double dx = p.x + 0.5 - ax.centroid.x, dy = p.y + 0.5 - ax.centroid.y;
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    const double angle = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    ax.major = {std::cos(angle), std::sin(angle)};
    const Point minor{-ax.major.y, ax.major.x};
    ax.t_min = ax.s_min = 1e18;
    ax.t_max = ax.s_max = -1e18;
    for (const auto& p : pixels) {
        const Point d = p.center() - ax.centroid;
        const double t = d.x * ax.major.x + d.y * ax.major.y;
        const double s = d.x * minor.x + d.y * minor.y;
        ax.t_min = std::min(ax.t_min, t);
        ax.t_max = std::max(ax.t_max, t);
        ax.s_min = std::min(ax.s_min, s);
        ax.s_max = std::max(ax.s_max, s);
    }
    return ax;
}

double point_segment_distance(Point p, const Segment& s) {
    const Point ab = s.b - s.a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0 ? ((p.x - s.a.x) * ab.x + (p.y - s.a.y) * ab.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, s.a + ab * t);
}

}  // namespace dgf::vision
