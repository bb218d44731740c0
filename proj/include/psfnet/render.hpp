#pragma once

#include "psfnet/ann.hpp"
#include "psfnet/types.hpp"

namespace psfnet {

/// Single-channel image, real-valued, row-major.
struct Image {
    int width = 0;
    int height = 0;
    double pitch_um = 1.0;
    std::vector<double> values;

    Image() = default;
    Image(int w, int h, double pitch, double fill = 0.0)
        : width(w), height(h), pitch_um(pitch), values(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }

    bool operator==(const Image&) const = default;
};

/// Pixel -> field-coordinate conversion: where the optical axis sits and how
/// large a pixel is.
struct FieldMapping {
    double cx = 0.0, cy = 0.0;  // optical-axis pixel coordinates
    double pitch_um = 1.0;
};

/// Per-pixel defocus field over an image.
struct DefocusMap {
    int width = 0;
    int height = 0;
    std::vector<double> dz_um;

    DefocusMap() = default;
    DefocusMap(int w, int h, double fill = 0.0)
        : width(w), height(h), dz_um(static_cast<size_t>(w) * h, fill) {}

    double at(int x, int y) const { return dz_um[static_cast<size_t>(y) * width + x]; }
};

/// R in mm, phi in degrees in [0, 360); image +y is up, so a pixel above the
/// center maps to phi = 90. The exact center maps to (R=0, phi=0).
FieldPoint pixel_to_field(const FieldMapping& mapping, double x, double y, double dz_um);

/// Thin-lens image distance i(o) = f*o/(o-f), distances in mm; pass infinity
/// for focus at the hyperfocal limit. Returns the image-plane shift in um.
/// Throws BehindFocalPlane when a finite distance is <= f.
double defocus_from_depth(double object_distance_mm, double focal_length_mm,
                          double focus_distance_mm);

/// Column x gets dz_left + (dz_right - dz_left) * x / (width - 1).
DefocusMap linear_depth_gradient(int width, int height, double dz_left_um, double dz_right_um);

/// Alternating cells, top-left cell at `high`.
Image checkerboard(int width, int height, int cell_px, double low, double high);

struct ConvolveStats {
    int clamped_dz_count = 0;  // defocus values clamped to the trained envelope
};

/// Spatially-variant convolution: the image is tiled, one kernel is inferred
/// per tile at the tile-center pixel's field point, and kernels are bilinearly
/// cross-faded between tile centers. tile_px = 1 reduces to exact per-pixel
/// inference. Boundary mode is edge-clamp. Defocus values are clamped to
/// [-50, +50] um and counted in stats.
Image convolve_spatially_variant(const Image& image, const MlpModel& model,
                                 const FieldMapping& mapping, const DefocusMap& dzmap, int tile_px,
                                 ConvolveStats* stats = nullptr);

}  // namespace psfnet
