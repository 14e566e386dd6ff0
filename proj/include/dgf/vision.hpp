#pragma once

// Low-level raster operations behind the perception detectors.

#include <cstdint>
#include <vector>

#include "dgf/core.hpp"
#include "dgf/image.hpp"

namespace dgf::vision {

struct Pixel {
    int x = 0;
    int y = 0;

    Point center() const { return {x + 0.5, y + 0.5}; }
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Contrast-limited adaptive histogram equalization with bilinear blending
/// between tile mappings. `clip_limit` is relative to the mean bin height.
GrayImage clahe(const GrayImage& img, double clip_limit, int tiles_x, int tiles_y);

/// 1 where the pixel is darker than its block mean by more than `offset`.
BinaryMap adaptive_threshold(const GrayImage& img, int block, double offset);

/// Square structuring element of side k (odd).
BinaryMap erode(const BinaryMap& m, int k);
BinaryMap dilate(const BinaryMap& m, int k);
BinaryMap open(const BinaryMap& m, int k);

/// Zhang-Suen thinning to a one-pixel skeleton.
BinaryMap thin(const BinaryMap& m);

/// Pixel lists of the connected regions whose value is `value`, in raster
/// order of their first pixel; 8- or 4-connectivity.
std::vector<std::vector<Pixel>> label_pixels(const BinaryMap& m, bool eight, bool value);

/// Clears 8-connected components smaller than min_pixels.
BinaryMap remove_small(const BinaryMap& m, int min_pixels);

/// Closed boundary chain of the 8-connected region containing `start`, which
/// must be its first pixel in raster order. Moore-neighbour tracing.
std::vector<Pixel> trace_contour(const BinaryMap& m, Pixel start);

/// Length of the closed chain; diagonal steps count sqrt(2).
double chain_length(const std::vector<Pixel>& chain);

/// Andrew's monotone chain; counter-clockwise in raster coordinates.
std::vector<Point> convex_hull(std::vector<Point> pts);
double polygon_area(const std::vector<Point>& poly);

struct Hole {
    std::vector<Pixel> pixels;
    BBox bbox;
    double circularity = 0.0;
    double aspect = 0.0;  // long side over short side of the bbox
};

struct Blob {
    std::vector<Pixel> pixels;
    BBox bbox;  // pixel-square bounds
    std::vector<Pixel> contour;
    double perimeter = 0.0;
    double solidity = 0.0;     // pixel count over hull area of pixel centers, at most 1
    double circularity = 0.0;  // 4*pi*A/P^2, at most 1
    Point centroid;
    std::vector<Hole> holes;

    double area() const { return static_cast<double>(pixels.size()); }
};

/// 8-connected components in raster order of their first pixel. Holes are the
/// 4-connected background regions enclosed by the component alone.
std::vector<Blob> label_components(const BinaryMap& m, int min_pixels = 1);

struct Axes {
    Point centroid;
    Point major;  // unit vector, raster coordinates
    double t_min = 0.0, t_max = 0.0;  // pixel-center projections on `major`
    double s_min = 0.0, s_max = 0.0;  // projections on the perpendicular

    double length() const { return t_max - t_min + 1.0; }
    double width() const { return s_max - s_min + 1.0; }
};

Axes principal_axes(const std::vector<Pixel>& pixels);

struct Segment {
    Point a;
    Point b;

    double length() const { return distance(a, b); }
};

struct HoughParams {
    double rho = 1.0;
    double theta_deg = 1.0;
    int votes = 30;
    double min_length = 30.0;
    int max_gap = 8;
    std::uint32_t seed = 12345;
};

/// Progressive probabilistic Hough transform over the set pixels of `m`.
/// Points are visited in a seeded random order, so output is deterministic.
std::vector<Segment> hough_segments(const BinaryMap& m, const HoughParams& p);

double point_segment_distance(Point p, const Segment& s);

}  // namespace dgf::vision
