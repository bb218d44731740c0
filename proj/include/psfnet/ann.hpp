#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "psfnet/types.hpp"

namespace psfnet {

enum class HiddenActivation : std::uint8_t { Tanh = 0, Sigmoid = 1, Relu = 2 };
enum class OutputActivation : std::uint8_t { Linear = 0, Sigmoid = 1 };

/// Per-input affine normalization: x_norm = (raw - offset) / scale.
struct InputNorm {
    double offset = 0.0;
    double scale = 1.0;
};

/// Feed-forward net: 3 (or 4 with sin/cos azimuth encoding) inputs, one
/// hidden layer, K*K outputs interpreted as a flattened PSF.
struct MlpModel {
    std::vector<int> layer_sizes;  // {n_in, H, K*K}
    HiddenActivation hidden_activation = HiddenActivation::Tanh;
    OutputActivation output_activation = OutputActivation::Linear;
    Eigen::MatrixXd w1, w2;        // rows = out, cols = in
    Eigen::VectorXd b1, b2;
    std::array<InputNorm, 3> input_norm;  // dz, r, phi
    int out_width = 0, out_height = 0;
    double out_pitch_um = 1.0;

    bool phi_sincos() const { return !layer_sizes.empty() && layer_sizes.front() == 4; }
    int output_size() const { return out_width * out_height; }
    void validate() const;
};

struct TrainConfig {
    int hidden_size = 80;
    int max_epochs = 24000;
    double learning_rate = 0.003;
    double momentum = 0.9;  // Adam beta1
    int batch_size = 0;     // 0 = full batch
    double validation_fraction = 0.15;
    int early_stop_patience = 1500;
    std::uint64_t seed = 1;
    HiddenActivation hidden_activation = HiddenActivation::Tanh;
    OutputActivation output_activation = OutputActivation::Linear;
    bool phi_sincos = false;

    void validate() const;
};

struct TrainReport {
    double final_train_perf = 0.0;  // mean per-sample root-sum-of-squares
    double final_val_perf = 0.0;
    int epochs_run = 0;
    std::vector<std::pair<double, double>> history;  // (train_perf, val_perf) per epoch
    std::uint64_t seed = 0;
};

struct SweepRow {
    int hidden = 0;
    int restarts_ok = 0;
    double mean_perf = 0.0;
    double avg_output_perf = 0.0;
    double std_perf = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    int failed_restarts = 0;
};

/// Map a field point into normalized network inputs.
std::vector<double> normalize_inputs(const FieldPoint& fp, const std::array<InputNorm, 3>& norm,
                                     bool phi_sincos = false);

/// Norms that map the dataset's per-input extremes to +-1.
std::array<InputNorm, 3> input_norm_from_dataset(const PsfDataset& data);

/// Raw output-layer activations (no clamping or renormalization).
Eigen::VectorXd forward_raw(const MlpModel& model, const FieldPoint& fp);

/// Inference contract: clamp negatives (linear output) and renormalize to a
/// volume-1 kernel. All-nonpositive outputs fall back to a uniform grid.
PsfGrid forward(const MlpModel& model, const FieldPoint& fp);

/// Root of the sum of squared differences.
double loss(const std::vector<double>& prediction, const std::vector<double>& target);

struct Gradients {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
};

/// Analytic gradient of the squared error sum_i (pred_i - target_i)^2 for one
/// sample, with respect to every weight and bias.
Gradients gradient(const MlpModel& model, const FieldPoint& fp, const std::vector<double>& target);

/// Full-batch (or mini-batch) Adam with a stepped learning-rate schedule,
/// seeded init and early stopping on a validation plateau.
std::pair<MlpModel, TrainReport> train(const PsfDataset& dataset, const TrainConfig& cfg);

/// .psfn binary round-trip.
std::vector<std::uint8_t> serialize(const MlpModel& model);
MlpModel deserialize(const std::vector<std::uint8_t>& bytes);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

/// Deterministic shuffled index split; fractions must sum to <= 1, the last
/// part takes the remainder.
std::vector<std::vector<size_t>> split_indices(size_t n, const std::vector<double>& fractions,
                                               std::uint64_t seed);
PsfDataset subset(const PsfDataset& data, const std::vector<size_t>& indices);

/// Hidden-size sweep: per size, `restarts` trainings with seeds
/// cfg.seed + restart_index, scored on a held-out test split.
SweepReport sweep(const PsfDataset& dataset, const std::vector<int>& hidden_sizes, int restarts,
                  const TrainConfig& cfg);

}  // namespace psfnet
