#pragma once

#include <json.hpp>

#include "sinodiff/core.hpp"

namespace sinodiff {

/// Fan-beam acquisition geometry: flat detector array, source and detector
/// rotating through a full 360 degrees with uniform view spacing. Distances
/// are in cm, the image is a square pixel grid centred on the rotation axis.
struct FanGeometry {
    int num_views        = 180;
    int num_detectors    = 360;
    double source_to_center   = 40.0;
    double detector_to_center = 40.0;
    double detector_width     = 41.3;
    int image_size       = 256;
    double pixel_spacing = 20.0 / 256.0;

    double source_to_detector() const { return source_to_center + detector_to_center; }
    double bin_width() const { return detector_width / num_detectors; }

    void validate() const {
        require(num_views >= 1, "geometry: num_views must be >= 1");
        require(num_detectors >= 1, "geometry: num_detectors must be >= 1");
        require(image_size >= 1, "geometry: image_size must be >= 1");
        require(source_to_center > 0.0, "geometry: source_to_center must be > 0");
        require(detector_to_center > 0.0, "geometry: detector_to_center must be > 0");
        require(detector_width > 0.0, "geometry: detector_width must be > 0");
        require(pixel_spacing > 0.0, "geometry: pixel_spacing must be > 0");
    }
};

inline void to_json(nlohmann::json& j, const FanGeometry& g) {
    j = nlohmann::json{{"num_views", g.num_views},
                       {"num_detectors", g.num_detectors},
                       {"source_to_center", g.source_to_center},
                       {"detector_to_center", g.detector_to_center},
                       {"detector_width", g.detector_width},
                       {"image_size", g.image_size},
                       {"pixel_spacing", g.pixel_spacing}};
}

inline void from_json(const nlohmann::json& j, FanGeometry& g) {
    if (j.contains("num_views")) j.at("num_views").get_to(g.num_views);
    if (j.contains("num_detectors")) j.at("num_detectors").get_to(g.num_detectors);
    if (j.contains("source_to_center")) j.at("source_to_center").get_to(g.source_to_center);
    if (j.contains("detector_to_center")) j.at("detector_to_center").get_to(g.detector_to_center);
    if (j.contains("detector_width")) j.at("detector_width").get_to(g.detector_width);
    if (j.contains("image_size")) j.at("image_size").get_to(g.image_size);
    if (j.contains("pixel_spacing")) j.at("pixel_spacing").get_to(g.pixel_spacing);
    g.validate();
}

/// Desk-scale default: clinical distances and detector width, reduced bin and
/// view counts, 20 cm field of view.
inline FanGeometry desk_geometry(int image_size = 256) {
    FanGeometry g;
    g.image_size    = image_size;
    g.pixel_spacing = 20.0 / image_size;
    return g;
}

/// 720 detector bins x 360 views.
inline FanGeometry preset_720x360(int image_size = 512) {
    FanGeometry g = desk_geometry(image_size);
    g.num_detectors = 720;
    g.num_views     = 360;
    return g;
}

/// 768 x 768 sinogram.
inline FanGeometry preset_768x768(int image_size = 512) {
    FanGeometry g = desk_geometry(image_size);
    g.num_detectors = 768;
    g.num_views     = 768;
    return g;
}

}  // namespace sinodiff
