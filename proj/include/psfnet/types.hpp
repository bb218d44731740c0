#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace psfnet {

// Error hierarchy. Each condition the library can signal gets its own type so
// callers (and the CLI exit-code mapping) can discriminate without string
// matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllZeroGrid : Error {
    AllZeroGrid() : Error("grid has zero total intensity") {}
};
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};
struct UpsampleNotSupported : Error {
    UpsampleNotSupported() : Error("target pitch is finer than source pitch (upsampling not supported)") {}
};
struct PitchMismatch : Error {
    explicit PitchMismatch(const std::string& what) : Error(what) {}
};
struct BehindFocalPlane : Error {
    BehindFocalPlane() : Error("distance must be strictly greater than the focal length") {}
};
struct InsufficientData : Error {
    explicit InsufficientData(const std::string& what) : Error(what) {}
};
struct NonFiniteLoss : Error {
    explicit NonFiniteLoss(const std::string& what) : Error(what) {}
};
struct BadMagic : Error {
    explicit BadMagic(const std::string& what) : Error(what) {}
};
struct BadVersion : Error {
    explicit BadVersion(const std::string& what) : Error(what) {}
};
struct TruncatedFile : Error {
    explicit TruncatedFile(const std::string& what) : Error(what) {}
};

/// One PSF as a 2D non-negative intensity grid with a physical pixel pitch.
struct PsfGrid {
    int width = 0;
    int height = 0;
    double pitch_um = 1.0;
    std::vector<double> values;  // row-major, width*height

    PsfGrid() = default;
    PsfGrid(int w, int h, double pitch, double fill = 0.0)
        : width(w), height(h), pitch_um(pitch), values(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }

    double sum() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }

    bool operator==(const PsfGrid&) const = default;
};

/// Canonical azimuth: wrap any angle into [0, 360).
inline double canonical_phi(double phi_deg) {
    double p = std::fmod(phi_deg, 360.0);
    if (p < 0.0) p += 360.0;
    if (p >= 360.0) p = 0.0;  // fmod can round up to exactly 360
    return p;
}

/// The three regression inputs: defocus (um), image height (mm), azimuth (deg).
struct FieldPoint {
    double dz_um = 0.0;
    double r_mm = 0.0;
    double phi_deg = 0.0;  // kept in [0, 360)

    FieldPoint() = default;
    FieldPoint(double dz, double r, double phi) : dz_um(dz), r_mm(r), phi_deg(canonical_phi(phi)) {}

    bool operator==(const FieldPoint&) const = default;
};

/// Ordered (FieldPoint, PsfGrid) pairs sharing grid dimensions and pitch.
struct PsfDataset {
    int grid_width = 0;
    int grid_height = 0;
    double pitch_um = 1.0;
    std::vector<std::pair<FieldPoint, PsfGrid>> samples;

    size_t size() const { return samples.size(); }

    void push(const FieldPoint& fp, PsfGrid grid) {
        if (samples.empty() && grid_width == 0) {
            grid_width = grid.width;
            grid_height = grid.height;
            pitch_um = grid.pitch_um;
        }
        if (grid.width != grid_width || grid.height != grid_height)
            throw DimensionMismatch("dataset grids must share dimensions");
        if (grid.pitch_um != pitch_um)
            throw PitchMismatch("dataset grids must share pitch");
        samples.emplace_back(fp, std::move(grid));
    }
};

}  // namespace psfnet
