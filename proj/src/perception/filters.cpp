#include <algorithm>
#include <array>
#include <cmath>

#include "dgf/vision.hpp"

namespace dgf::vision {
namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

template <typename Pred>
BinaryMap square_filter(const BinaryMap& m, int k, bool border, Pred keep) {
    if (k < 1 || k % 2 == 0) throw Error("structuring element must be odd and positive");
    const int r = k / 2;
    BinaryMap tmp(m.width, m.height, 0), out(m.width, m.height, 0);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            int count = 0;
            for (int dx = -r; dx <= r; ++dx) {
                const int xx = x + dx;
                count += (xx < 0 || xx >= m.width) ? border : (m.at(xx, y) != 0);
            }
            tmp.at(x, y) = keep(count, k);
        }
    }
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            int count = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = y + dy;
                count += (yy < 0 || yy >= m.height) ? border : (tmp.at(x, yy) != 0);
            }
            out.at(x, y) = keep(count, k);
        }
    }
    return out;
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += kernel[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    for (auto& v : kernel) v /= sum;

    std::vector<double> tmp(img.pixels.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += kernel[i + r] * img.at(clamp_index(x + i, img.width), y);
            tmp[static_cast<std::size_t>(y) * img.width + x] = acc;
        }
    }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                acc += kernel[i + r] * tmp[static_cast<std::size_t>(clamp_index(y + i, img.height)) * img.width + x];
            }
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
        }
    }
    return out;
}

GrayImage clahe(const GrayImage& img, double clip_limit, int tiles_x, int tiles_y) {
    if (img.empty()) throw Error("clahe: empty image");
    if (tiles_x < 1 || tiles_y < 1 || img.width < tiles_x || img.height < tiles_y) {
        throw Error("clahe: image smaller than the tile grid");
    }
    const int tw = (img.width + tiles_x - 1) / tiles_x;
    const int th = (img.height + tiles_y - 1) / tiles_y;
    std::vector<std::array<std::uint8_t, 256>> lut(static_cast<std::size_t>(tiles_x) * tiles_y);

    for (int ty = 0; ty < tiles_y; ++ty) {
        for (int tx = 0; tx < tiles_x; ++tx) {
            const int x0 = tx * tw, x1 = std::min(img.width, x0 + tw);
            const int y0 = ty * th, y1 = std::min(img.height, y0 + th);
            std::array<int, 256> hist{};
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) ++hist[img.at(x, y)];
            }
            const int n = std::max(1, (x1 - x0) * (y1 - y0));
            if (clip_limit > 0.0) {
                const int clip = std::max(1, static_cast<int>(clip_limit * n / 256.0));
                int excess = 0;
                for (auto& h : hist) {
                    if (h > clip) {
                        excess += h - clip;
                        h = clip;
                    }
                }
                const int bonus = excess / 256;
                const int residual = excess % 256;
                for (auto& h : hist) h += bonus;
                if (residual > 0) {
                    const int step = std::max(1, 256 / residual);
                    for (int i = 0, left = residual; i < 256 && left > 0; i += step, --left) ++hist[i];
                }
            }
            auto& table = lut[static_cast<std::size_t>(ty) * tiles_x + tx];
            int cdf = 0;
            for (int v = 0; v < 256; ++v) {
                cdf += hist[v];
                table[v] = static_cast<std::uint8_t>(std::clamp(std::lround(cdf * 255.0 / n), 0L, 255L));
            }
        }
    }

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double gy = (y + 0.5) / th - 0.5;
        const int ty0 = std::clamp(static_cast<int>(std::floor(gy)), 0, tiles_y - 1);
        const int ty1 = std::min(ty0 + 1, tiles_y - 1);
        const double fy = std::clamp(gy - ty0, 0.0, 1.0);
        for (int x = 0; x < img.width; ++x) {
            const double gx = (x + 0.5) / tw - 0.5;
            const int tx0 = std::clamp(static_cast<int>(std::floor(gx)), 0, tiles_x - 1);
            const int tx1 = std::min(tx0 + 1, tiles_x - 1);
            const double fx = std::clamp(gx - tx0, 0.0, 1.0);
            const std::uint8_t v = img.at(x, y);
            auto at = [&](int tx, int ty) { return lut[static_cast<std::size_t>(ty) * tiles_x + tx][v]; };
            const double top = (1 - fx) * at(tx0, ty0) + fx * at(tx1, ty0);
            const double bottom = (1 - fx) * at(tx0, ty1) + fx * at(tx1, ty1);
            out.at(x, y) = static_cast<std::uint8_t>(std::lround((1 - fy) * top + fy * bottom));
        }
    }
    return out;
}

BinaryMap adaptive_threshold(const GrayImage& img, int block, double offset) {
    if (block < 3 || block % 2 == 0) throw Error("adaptive block must be odd and at least 3");
    const int w = img.width, h = img.height, r = block / 2;
    std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    auto I = [&](int x, int y) -> std::int64_t& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
        std::int64_t row = 0;
        for (int x = 0; x < w; ++x) {
            row += img.at(x, y);
            I(x + 1, y + 1) = I(x + 1, y) + row;
        }
    }
    BinaryMap out(w, h, 0);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
            const double sum = static_cast<double>(I(x1, y1) - I(x0, y1) - I(x1, y0) + I(x0, y0));
            const double mean = sum / ((x1 - x0) * (y1 - y0));
            out.at(x, y) = img.at(x, y) < mean - offset ? 1 : 0;
        }
    }
    return out;
}

BinaryMap erode(const BinaryMap& m, int k) {
    return square_filter(m, k, true, [](int count, int n) { return count == n ? 1 : 0; });
}

BinaryMap dilate(const BinaryMap& m, int k) {
    return square_filter(m, k, false, [](int count, int) { return count > 0 ? 1 : 0; });
}

BinaryMap open(const BinaryMap& m, int k) { return dilate(erode(m, k), k); }

BinaryMap thin(const BinaryMap& m) {
    BinaryMap img = m;
    for (auto& p : img.pixels) p = p ? 1 : 0;
    auto px = [&](int x, int y) -> int { return img.in_bounds(x, y) ? img.at(x, y) : 0; };
    std::vector<std::size_t> to_clear;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    if (!img.at(x, y)) continue;
                    // P2..P9 clockwise from north.
                    const int p[8] = {px(x, y - 1),     px(x + 1, y - 1), px(x + 1, y), px(x + 1, y + 1),
                                      px(x, y + 1),     px(x - 1, y + 1), px(x - 1, y), px(x - 1, y - 1)};
                    int b = 0, a = 0;
                    for (int i = 0; i < 8; ++i) {
                        b += p[i];
                        a += (p[i] == 0 && p[(i + 1) % 8] == 1);
                    }
                    if (b < 2 || b > 6 || a != 1) continue;
                    if (pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                  : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0)) {
                        to_clear.push_back(static_cast<std::size_t>(y) * img.width + x);
                    }
                }
            }
            for (auto i : to_clear) img.pixels[i] = 0;
            changed = changed || !to_clear.empty();
        }
    }
    return img;
}

BinaryMap remove_small(const BinaryMap& m, int min_pixels) {
    BinaryMap out(m.width, m.height, 0);
    for (const auto& comp : label_pixels(m, true, true)) {
        if (static_cast<int>(comp.size()) < min_pixels) continue;
        for (const auto& p : comp) out.at(p.x, p.y) = 1;
    }
    return out;
}

}  // namespace dgf::vision
