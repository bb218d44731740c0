#include "psfnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace psfnet {

double eq2_distance(const PsfGrid& a, const PsfGrid& b) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch("eq2_distance: grid dimensions differ");
    double s = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double per_pixel_rmse(const PsfGrid& a, const PsfGrid& b) {
    return eq2_distance(a, b) / std::sqrt(static_cast<double>(a.values.size()));
}

EvalSummary evaluate(const MlpModel& model, const PsfDataset& dataset) {
    if (model.out_width != dataset.grid_width || model.out_height != dataset.grid_height)
        throw DimensionMismatch("evaluate: model output grid does not match dataset grids");
    EvalSummary summary;
    summary.n_samples = dataset.samples.size();
    double sq_acc = 0.0;
    for (const auto& [fp, grid] : dataset.samples) {
        const PsfGrid pred = forward(model, fp);
        const double d = eq2_distance(pred, grid);
        summary.mean_eq2 += d;
        summary.max_eq2 = std::max(summary.max_eq2, d);
        sq_acc += d * d;
    }
    if (summary.n_samples > 0) {
        summary.mean_eq2 /= static_cast<double>(summary.n_samples);
        summary.per_pixel_rmse = std::sqrt(
            sq_acc / (static_cast<double>(summary.n_samples) * model.output_size()));
    }
    return summary;
}

std::string EvalSummary::csv_row() const {
    std::ostringstream os;
    os.precision(12);
    os << n_samples << ',' << mean_eq2 << ',' << max_eq2 << ',' << per_pixel_rmse;
    return os.str();
}

}  // namespace psfnet
