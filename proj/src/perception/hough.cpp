#include <cmath>
#include <numbers>
#include <random>

#include "dgf/vision.hpp"

namespace dgf::vision {

std::vector<Segment> hough_segments(const BinaryMap& m, const HoughParams& p) {
    if (p.rho <= 0 || p.theta_deg <= 0 || p.votes < 1 || p.min_length <= 0 || p.max_gap < 0) {
        throw Error("hough parameters must be positive");
    }
    const int w = m.width, h = m.height;
    const double theta = p.theta_deg * std::numbers::pi / 180.0;
    const int n_angles = static_cast<int>(std::lround(std::numbers::pi / theta));
    const int n_rho = static_cast<int>(std::lround(((w + h) * 2 + 1) / p.rho));
    std::vector<double> cos_t(n_angles), sin_t(n_angles);
    for (int n = 0; n < n_angles; ++n) {
        cos_t[n] = std::cos(n * theta) / p.rho;
        sin_t[n] = std::sin(n * theta) / p.rho;
    }
    std::vector<int> acc(static_cast<std::size_t>(n_angles) * n_rho, 0);
    auto rho_bin = [&](int n, int x, int y) {
        return static_cast<std::size_t>(n) * n_rho + std::lround(x * cos_t[n] + y * sin_t[n]) + (n_rho - 1) / 2;
    };

    std::vector<std::uint8_t> mask(m.pixels.size(), 0);
    std::vector<std::uint8_t> voted(m.pixels.size(), 0);
    std::vector<Pixel> points;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (m.at(x, y)) {
                mask[static_cast<std::size_t>(y) * w + x] = 1;
                points.push_back({x, y});
            }
        }
    }

    std::mt19937 rng(p.seed);
    std::vector<Segment> out;
    constexpr int kShift = 16;
    for (std::size_t count = points.size(); count > 0; --count) {
        const std::size_t idx = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
        const Pixel pt = points[idx];
        points[idx] = points[count - 1];
        const std::size_t pi = static_cast<std::size_t>(pt.y) * w + pt.x;
        if (!mask[pi]) continue;

        int best = p.votes - 1, best_n = -1;
        for (int n = 0; n < n_angles; ++n) {
            const int v = ++acc[rho_bin(n, pt.x, pt.y)];
            if (v > best) {
                best = v;
                best_n = n;
            }
        }
        voted[pi] = 1;
        if (best_n < 0) continue;

        // Walk both ways along the winning line in fixed point.
        const double a = -sin_t[best_n] * p.rho, b = cos_t[best_n] * p.rho;
        const bool x_major = std::abs(a) > std::abs(b);
        long x0 = pt.x, y0 = pt.y, dx0, dy0;
        if (x_major) {
            dx0 = a > 0 ? 1 : -1;
            dy0 = std::lround(b * (1L << kShift) / std::abs(a));
            y0 = (y0 << kShift) + (1L << (kShift - 1));
        } else {
            dy0 = b > 0 ? 1 : -1;
            dx0 = std::lround(a * (1L << kShift) / std::abs(b));
            x0 = (x0 << kShift) + (1L << (kShift - 1));
        }
        auto coords = [&](long x, long y) {
            return x_major ? Pixel{static_cast<int>(x), static_cast<int>(y >> kShift)}
                           : Pixel{static_cast<int>(x >> kShift), static_cast<int>(y)};
        };

        Pixel ends[2] = {pt, pt};
        for (int k = 0; k < 2; ++k) {
            const long dx = k ? -dx0 : dx0, dy = k ? -dy0 : dy0;
            int gap = 0;
            for (long x = x0, y = y0;; x += dx, y += dy) {
                const Pixel q = coords(x, y);
                if (q.x < 0 || q.x >= w || q.y < 0 || q.y >= h) break;
                if (mask[static_cast<std::size_t>(q.y) * w + q.x]) {
                    gap = 0;
                    ends[k] = q;
                } else if (++gap > p.max_gap) {
                    break;
                }
            }
        }
        const bool good = std::abs(ends[1].x - ends[0].x) >= p.min_length ||
                          std::abs(ends[1].y - ends[0].y) >= p.min_length;

        for (int k = 0; k < 2; ++k) {
            const long dx = k ? -dx0 : dx0, dy = k ? -dy0 : dy0;
            for (long x = x0, y = y0;; x += dx, y += dy) {
                const Pixel q = coords(x, y);
                if (q.x < 0 || q.x >= w || q.y < 0 || q.y >= h) break;
                const std::size_t qi = static_cast<std::size_t>(q.y) * w + q.x;
                if (mask[qi]) {
                    if (good && voted[qi]) {
                        for (int n = 0; n < n_angles; ++n) --acc[rho_bin(n, q.x, q.y)];
                        voted[qi] = 0;
                    }
                    mask[qi] = 0;
                }
                if (q == ends[k]) break;
            }
        }
        if (good) out.push_back({ends[0].center(), ends[1].center()});
    }
    return out;
}

}  // namespace dgf::vision
