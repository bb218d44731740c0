#pragma once

#include "psfnet/types.hpp"

namespace psfnet {

/// Intensity-weighted mean position of a grid, in sub-pixel coordinates.
/// Throws AllZeroGrid when total intensity is zero.
std::pair<double, double> centroid(const PsfGrid& grid);

/// Recenter on the nearest-pixel-rounded centroid and crop to an
/// out_size x out_size window. Regions outside the input read as zero;
/// pitch is unchanged.
PsfGrid center_and_crop(const PsfGrid& grid, int out_size);

/// Downsample to target_pitch_um / target_size, centered on the input's
/// physical center. Each output pixel collects the mass of the input that
/// falls inside its physical footprint (area-averaged binning), so total
/// volume is conserved whenever the output footprint covers the input.
/// Throws UpsampleNotSupported when target_pitch_um < grid.pitch_um.
PsfGrid resample(const PsfGrid& grid, double target_pitch_um, int target_size);

/// Scale so the values sum to one. Throws AllZeroGrid on zero total.
PsfGrid normalize_volume(const PsfGrid& grid);

/// Row-major flattening and its exact inverse.
std::vector<double> flatten(const PsfGrid& grid);
PsfGrid unflatten(const std::vector<double>& v, int width, int height, double pitch_um);

}  // namespace psfnet
