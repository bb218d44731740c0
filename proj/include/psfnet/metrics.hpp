#pragma once

#include "psfnet/ann.hpp"
#include "psfnet/types.hpp"

namespace psfnet {

struct EvalSummary {
    size_t n_samples = 0;
    double mean_eq2 = 0.0;
    double max_eq2 = 0.0;
    double per_pixel_rmse = 0.0;

    std::string csv_row() const;
};

/// Root of the sum of squared per-pixel differences.
double eq2_distance(const PsfGrid& a, const PsfGrid& b);

/// eq2_distance / sqrt(pixel count); comparable across resolutions.
double per_pixel_rmse(const PsfGrid& a, const PsfGrid& b);

/// Score forward(model, fp) against every sample.
EvalSummary evaluate(const MlpModel& model, const PsfDataset& dataset);

}  // namespace psfnet
