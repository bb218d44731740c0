#pragma once

#include <cstdint>

#include "psfnet/types.hpp"

namespace psfnet {

/// Parameters of the deterministic synthetic aberrated lens used to generate
/// training corpora. The blob is an anisotropic Gaussian whose widths grow
/// with defocus and image height, plus a radial skew term and a seeded
/// per-pixel noise floor.
struct SynthLensSpec {
    double focal_length_mm = 6.0;
    std::uint64_t seed = 1;
    double base_sigma_um = 5.0;              // on-axis in-focus width
    double defocus_blur_rate = 0.12;         // width growth per um of |dz|
    double field_curvature_um_per_mm2 = 1.0; // best-focus shift over R^2
    double astigmatism_rate = 0.20;          // radial elongation per mm of R
    double coma_skew_rate = 0.30;            // radial asymmetry per mm of R
    double asymmetry_eps = 0.10;             // through-focus asymmetry knob
    double noise_floor = 0.0;                // additive per-pixel noise amplitude

    void validate() const;
};

/// Cartesian sampling grid over (dz, R, phi).
struct SamplingGrid {
    std::vector<double> dz_values;   // um
    std::vector<double> r_values;    // mm
    std::vector<double> phi_values;  // deg

    size_t size() const { return dz_values.size() * r_values.size() * phi_values.size(); }
};

/// Generate one PSF grid at a field point. Deterministic in all arguments.
PsfGrid synth_psf(const SynthLensSpec& spec, const FieldPoint& fp, int width, int height,
                  double pitch_um);

/// One sample per cartesian-product point, ordered dz-outer, r-middle, phi-inner.
PsfDataset generate_dataset(const SynthLensSpec& spec, const SamplingGrid& grid, int width,
                            int height, double pitch_um);

/// Flat key=value text round-trip for SynthLensSpec.
std::string spec_to_text(const SynthLensSpec& spec);
SynthLensSpec spec_from_text(const std::string& text);

}  // namespace psfnet
