#pragma once

#include <filesystem>
#include <string>

#include "dgf/core.hpp"

namespace dgf::test {

/// Datasets written by the generate_testdata fixture (seed 42).
inline std::filesystem::path testdata(const std::string& benchmark) {
    return std::filesystem::path(DGF_TESTDATA_DIR) / benchmark;
}

inline Primitive box(PrimitiveKind kind, double x0, double y0, double x1, double y1) {
    Primitive p;
    p.kind = kind;
    p.bbox = {x0, y0, x1, y1};
    return p;
}

inline Primitive wire(Point a, Point b, double confidence = 1.0) {
    Primitive p;
    p.kind = PrimitiveKind::Wire;
    p.endpoints = std::make_pair(a, b);
    p.bbox = BBox::around({a, b}, 1.0);
    p.orientation = orientation_of(a, b);
    p.confidence = confidence;
    return p;
}

inline Primitive arrow(Point tail, Point tip, double confidence = 1.0) {
    Primitive p = wire(tail, tip, confidence);
    p.kind = PrimitiveKind::ForceArrow;
    return p;
}

inline Primitive component(ComponentKind k, Point center, double orientation = 0.0, double half = 30.0) {
    Primitive p;
    p.kind = PrimitiveKind::Component;
    p.component_kind = k;
    p.bbox = {center.x - half, center.y - 10, center.x + half, center.y + 10};
    p.orientation = orientation;
    return p;
}

}  // namespace dgf::test
