#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "dgf/core.hpp"
#include "dgf/image.hpp"
#include "dgf/vision.hpp"

namespace dgf {

struct ArrowFilter {
    double area_min = 100.0;
    double area_max = 5000.0;
    double solidity_min = 0.40;
    double solidity_max = 0.95;
    double elongation_min = 2.0;
    /// Pixel mass of the heavier end quarter over the lighter one.
    double head_mass_ratio_min = 1.3;
};

struct ComponentFilter {
    double area_min = 200.0;   // cluster bbox area, px^2
    double area_max = 8000.0;
    double cluster_gap = 8.0;  // parts closer than this form one symbol
    int min_part_pixels = 12;
    double hole_min_pixels = 60.0;
    double source_circularity_min = 0.80;  // round hole -> current source
    double resistor_aspect_min = 2.0;      // elongated hole -> resistor
    double battery_plate_ratio_min = 1.4;  // long/short plate -> battery, else capacitor
    int core_kernel = 7;                   // erosion that only filled triangles survive
    int core_min_pixels = 12;
};

struct JunctionFilter {
    double area_min = 10.0;
    double area_max = 80.0;
    double circularity_min = 0.7;
    int open_kernel = 5;
    double wire_distance = 6.0;
};

struct PerceptionConfig {
    double denoise_sigma = 1.0;
    double clahe_clip_limit = 2.0;
    int clahe_tiles = 8;
    int adaptive_block = 21;
    double adaptive_offset = 20.0;
    int speckle_min_pixels = 12;
    ArrowFilter arrow;
    vision::HoughParams hough;
    double wire_merge_angle_deg = 3.0;
    double wire_merge_distance = 3.0;
    double wire_overlap_suppress = 0.7;  // fraction of a segment covered by a longer one
    ComponentFilter component;
    JunctionFilter junction;
    double nms_iou = 0.5;
    /// When set, detect_all writes its intermediate maps here as PNG.
    std::optional<std::filesystem::path> debug_dir;

    /// Throws dgf::Error naming the first non-positive threshold.
    void validate() const;
};

BinaryMap preprocess(const GrayImage& img, const PerceptionConfig& cfg = {});

std::vector<Primitive> detect_arrows(const BinaryMap& map, const PerceptionConfig& cfg = {});
std::vector<Primitive> detect_components(const BinaryMap& map, const PerceptionConfig& cfg = {});
/// Runs on the map as given; detect_all first erases arrow and symbol pixels.
std::vector<Primitive> detect_wires(const BinaryMap& map, const PerceptionConfig& cfg = {});
std::vector<Primitive> detect_junctions(const BinaryMap& map, const std::vector<Primitive>& wires,
                                        const PerceptionConfig& cfg = {});

/// Greedy per-kind suppression; output sorted by confidence, descending.
std::vector<Primitive> nms(std::vector<Primitive> detections, double iou_threshold);

std::vector<Primitive> detect_all(const GrayImage& img, const PerceptionConfig& cfg = {});

}  // namespace dgf
