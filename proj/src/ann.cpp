#include "psfnet/ann.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "psfnet/psf_ops.hpp"

namespace psfnet {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double activate(double x, HiddenActivation act) {
    switch (act) {
        case HiddenActivation::Tanh: return std::tanh(x);
        case HiddenActivation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case HiddenActivation::Relu: return x > 0.0 ? x : 0.0;
    }
    return x;
}

// Derivative expressed through the activation value.
double activate_deriv(double a, HiddenActivation act) {
    switch (act) {
        case HiddenActivation::Tanh: return 1.0 - a * a;
        case HiddenActivation::Sigmoid: return a * (1.0 - a);
        case HiddenActivation::Relu: return a > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

Eigen::VectorXd input_vector(const MlpModel& model, const FieldPoint& fp) {
    const auto x = normalize_inputs(fp, model.input_norm, model.phi_sincos());
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    for (size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
    return v;
}

}  // namespace

void MlpModel::validate() const {
    if (layer_sizes.size() != 3) throw DimensionMismatch("model must have exactly 3 layers");
    if (layer_sizes[0] != 3 && layer_sizes[0] != 4)
        throw DimensionMismatch("input layer must have 3 (or 4 with sin/cos azimuth) neurons");
    if (w1.rows() != layer_sizes[1] || w1.cols() != layer_sizes[0] ||
        w2.rows() != layer_sizes[2] || w2.cols() != layer_sizes[1] ||
        b1.size() != layer_sizes[1] || b2.size() != layer_sizes[2])
        throw DimensionMismatch("weight shapes inconsistent with layer sizes");
    if (out_width * out_height != layer_sizes[2])
        throw DimensionMismatch("output grid does not match output layer size");
    for (const auto& n : input_norm)
        if (n.scale <= 0.0) throw Error("input normalization scale must be > 0");
}

void TrainConfig::validate() const {
    if (hidden_size < 1) throw Error("hidden_size must be >= 1");
    if (max_epochs < 1) throw Error("max_epochs must be >= 1");
    if (learning_rate <= 0.0) throw Error("learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw Error("momentum must be in [0, 1)");
    if (validation_fraction <= 0.0 || validation_fraction >= 1.0)
        throw Error("validation_fraction must be in (0, 1)");
    if (early_stop_patience < 1) throw Error("early_stop_patience must be >= 1");
    if (batch_size < 0) throw Error("batch_size must be >= 0");
}

std::vector<double> normalize_inputs(const FieldPoint& fp, const std::array<InputNorm, 3>& norm,
                                     bool phi_sincos) {
    const double dz = (fp.dz_um - norm[0].offset) / norm[0].scale;
    const double r = (fp.r_mm - norm[1].offset) / norm[1].scale;
    if (phi_sincos) {
        const double a = fp.phi_deg * kDegToRad;
        return {dz, r, std::sin(a), std::cos(a)};
    }
    return {dz, r, (fp.phi_deg - norm[2].offset) / norm[2].scale};
}

std::array<InputNorm, 3> input_norm_from_dataset(const PsfDataset& data) {
    if (data.samples.empty()) throw InsufficientData("empty dataset");
    double lo[3], hi[3];
    for (int i = 0; i < 3; ++i) {
        lo[i] = std::numeric_limits<double>::infinity();
        hi[i] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& [fp, grid] : data.samples) {
        const double raw[3] = {fp.dz_um, fp.r_mm, fp.phi_deg};
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], raw[i]);
            hi[i] = std::max(hi[i], raw[i]);
        }
    }
    std::array<InputNorm, 3> norm;
    for (int i = 0; i < 3; ++i) {
        norm[i].offset = (lo[i] + hi[i]) / 2.0;
        norm[i].scale = (hi[i] - lo[i]) / 2.0;
        if (norm[i].scale <= 0.0) norm[i].scale = 1.0;  // constant input
    }
    return norm;
}

Eigen::VectorXd forward_raw(const MlpModel& model, const FieldPoint& fp) {
    const Eigen::VectorXd x = input_vector(model, fp);
    Eigen::VectorXd h = model.w1 * x + model.b1;
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = activate(h[i], model.hidden_activation);
    Eigen::VectorXd y = model.w2 * h + model.b2;
    if (model.output_activation == OutputActivation::Sigmoid)
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
    return y;
}

PsfGrid forward(const MlpModel& model, const FieldPoint& fp) {
    Eigen::VectorXd y = forward_raw(model, fp);
    if (model.output_activation == OutputActivation::Linear)
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::max(y[i], 0.0);
    double total = y.sum();
    std::vector<double> v(static_cast<size_t>(y.size()));
    if (total > 0.0) {
        for (Eigen::Index i = 0; i < y.size(); ++i) v[static_cast<size_t>(i)] = y[i] / total;
    } else {
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(y.size()));
    }
    return unflatten(v, model.out_width, model.out_height, model.out_pitch_um);
}

double loss(const std::vector<double>& prediction, const std::vector<double>& target) {
    if (prediction.size() != target.size())
        throw DimensionMismatch("loss: vector lengths differ");
    double s = 0.0;
    for (size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction[i] - target[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Gradients gradient(const MlpModel& model, const FieldPoint& fp, const std::vector<double>& target) {
    model.validate();
    if (static_cast<Eigen::Index>(target.size()) != model.w2.rows())
        throw DimensionMismatch("gradient: target length does not match output layer");

    const Eigen::VectorXd x = input_vector(model, fp);
    Eigen::VectorXd a1 = model.w1 * x + model.b1;
    for (Eigen::Index i = 0; i < a1.size(); ++i) a1[i] = activate(a1[i], model.hidden_activation);
    Eigen::VectorXd y = model.w2 * a1 + model.b2;
    if (model.output_activation == OutputActivation::Sigmoid)
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));

    // d/dy of sum_i (y_i - t_i)^2
    Eigen::VectorXd dy(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) dy[i] = 2.0 * (y[i] - target[i]);
    if (model.output_activation == OutputActivation::Sigmoid)
        for (Eigen::Index i = 0; i < y.size(); ++i) dy[i] *= y[i] * (1.0 - y[i]);

    Gradients g;
    g.w2 = dy * a1.transpose();
    g.b2 = dy;
    Eigen::VectorXd da1 = model.w2.transpose() * dy;
    for (Eigen::Index i = 0; i < da1.size(); ++i)
        da1[i] *= activate_deriv(a1[i], model.hidden_activation);
    g.w1 = da1 * x.transpose();
    g.b1 = da1;
    return g;
}

std::vector<std::vector<size_t>> split_indices(size_t n, const std::vector<double>& fractions,
                                               std::uint64_t seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<std::vector<size_t>> parts;
    size_t used = 0;
    for (size_t p = 0; p < fractions.size(); ++p) {
        size_t count = (p + 1 == fractions.size())
                           ? n - used
                           : static_cast<size_t>(std::llround(fractions[p] * static_cast<double>(n)));
        count = std::min(count, n - used);
        parts.emplace_back(idx.begin() + used, idx.begin() + used + count);
        used += count;
    }
    return parts;
}

PsfDataset subset(const PsfDataset& data, const std::vector<size_t>& indices) {
    PsfDataset out;
    out.grid_width = data.grid_width;
    out.grid_height = data.grid_height;
    out.pitch_um = data.pitch_um;
    for (size_t i : indices) out.samples.push_back(data.samples[i]);
    return out;
}

std::pair<MlpModel, TrainReport> train(const PsfDataset& dataset, const TrainConfig& cfg) {
    cfg.validate();
    const size_t n = dataset.samples.size();
    if (n < 2) throw InsufficientData("training needs at least 2 samples");
    if (dataset.grid_width != dataset.grid_height)
        throw DimensionMismatch("training grids must be square");

    const int n_out = dataset.grid_width * dataset.grid_height;
    const int n_in = cfg.phi_sincos ? 4 : 3;
    const int n_hid = cfg.hidden_size;

    MlpModel model;
    model.layer_sizes = {n_in, n_hid, n_out};
    model.hidden_activation = cfg.hidden_activation;
    model.output_activation = cfg.output_activation;
    model.input_norm = input_norm_from_dataset(dataset);
    model.out_width = dataset.grid_width;
    model.out_height = dataset.grid_height;
    model.out_pitch_um = dataset.pitch_um;

    // Init: weights and biases uniform in +-1/sqrt(fan_in), all from the seed.
    std::mt19937_64 rng(cfg.seed);
    auto fill_uniform = [&rng](auto& m, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
    };
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(n_in));
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(n_hid));
    model.w1.resize(n_hid, n_in);
    model.b1.resize(n_hid);
    model.w2.resize(n_out, n_hid);
    model.b2.resize(n_out);
    fill_uniform(model.w1, bound1);
    fill_uniform(model.b1, bound1);
    fill_uniform(model.w2, bound2);
    fill_uniform(model.b2, bound2);

    // Train/validation split; a split that would leave either side empty is
    // rebalanced by one sample.
    auto parts = split_indices(n, {1.0 - cfg.validation_fraction, cfg.validation_fraction},
                               cfg.seed);
    if (parts[0].empty()) {
        parts[0].push_back(parts[1].back());
        parts[1].pop_back();
    }
    if (parts[1].empty()) {
        parts[1].push_back(parts[0].back());
        parts[0].pop_back();
    }

    auto build = [&](const std::vector<size_t>& idx, Eigen::MatrixXd& X, Eigen::MatrixXd& T) {
        X.resize(static_cast<Eigen::Index>(idx.size()), n_in);
        T.resize(static_cast<Eigen::Index>(idx.size()), n_out);
        for (size_t row = 0; row < idx.size(); ++row) {
            const auto& [fp, grid] = dataset.samples[idx[row]];
            const auto x = normalize_inputs(fp, model.input_norm, cfg.phi_sincos);
            for (int c = 0; c < n_in; ++c) X(static_cast<Eigen::Index>(row), c) = x[c];
            for (int c = 0; c < n_out; ++c)
                T(static_cast<Eigen::Index>(row), c) = grid.values[static_cast<size_t>(c)];
        }
    };
    Eigen::MatrixXd X, T, Xv, Tv;
    build(parts[0], X, T);
    build(parts[1], Xv, Tv);
    const Eigen::Index n_train = X.rows();

    auto apply_hidden = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = activate(m.data()[i], cfg.hidden_activation);
    };
    auto net_forward = [&](const Eigen::MatrixXd& Xin, Eigen::MatrixXd& A, Eigen::MatrixXd& Y) {
        A = (Xin * model.w1.transpose()).rowwise() + model.b1.transpose();
        apply_hidden(A);
        Y = (A * model.w2.transpose()).rowwise() + model.b2.transpose();
        if (cfg.output_activation == OutputActivation::Sigmoid)
            for (Eigen::Index i = 0; i < Y.size(); ++i)
                Y.data()[i] = 1.0 / (1.0 + std::exp(-Y.data()[i]));
    };
    // Mean per-sample root-sum-of-squares over a set.
    auto perf = [&](const Eigen::MatrixXd& Xin, const Eigen::MatrixXd& Tin) {
        Eigen::MatrixXd A, Y;
        net_forward(Xin, A, Y);
        return (Y - Tin).rowwise().norm().mean();
    };

    // Adam state. Momentum-only full-batch descent was evaluated first and
    // converges far too slowly on this objective; cfg.momentum doubles as
    // Adam's beta1.
    const double beta1 = cfg.momentum;
    const double beta2 = 0.999;
    const double adam_eps = 1e-8;
    Eigen::MatrixXd mw1 = Eigen::MatrixXd::Zero(n_hid, n_in), vw1 = mw1;
    Eigen::MatrixXd mw2 = Eigen::MatrixXd::Zero(n_out, n_hid), vw2 = mw2;
    Eigen::VectorXd mb1 = Eigen::VectorXd::Zero(n_hid), vb1 = mb1;
    Eigen::VectorXd mb2 = Eigen::VectorXd::Zero(n_out), vb2 = mb2;
    long step_count = 0;

    auto step = [&](const Eigen::MatrixXd& Xb, const Eigen::MatrixXd& Tb, double lr) {
        Eigen::MatrixXd A, Y;
        net_forward(Xb, A, Y);
        const double nb = static_cast<double>(Xb.rows());
        Eigen::MatrixXd dY = 2.0 * (Y - Tb) / nb;
        if (cfg.output_activation == OutputActivation::Sigmoid)
            for (Eigen::Index i = 0; i < dY.size(); ++i)
                dY.data()[i] *= Y.data()[i] * (1.0 - Y.data()[i]);
        Eigen::MatrixXd gw2 = dY.transpose() * A;
        Eigen::VectorXd gb2 = dY.colwise().sum();
        Eigen::MatrixXd dA = dY * model.w2;
        for (Eigen::Index i = 0; i < dA.size(); ++i)
            dA.data()[i] *= activate_deriv(A.data()[i], cfg.hidden_activation);
        Eigen::MatrixXd gw1 = dA.transpose() * Xb;
        Eigen::VectorXd gb1 = dA.colwise().sum();

        ++step_count;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        auto adam = [&](auto& m, auto& v, const auto& g, auto& p) {
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v.array() + (1.0 - beta2) * g.array().square();
            p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam_eps);
        };
        adam(mw1, vw1, gw1, model.w1);
        adam(mb1, vb1, gb1, model.b1);
        adam(mw2, vw2, gw2, model.w2);
        adam(mb2, vb2, gb2, model.b2);
    };

    TrainReport report;
    report.seed = cfg.seed;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    // Deterministic step schedule: halve the rate in four stages.
    const int decay_interval = std::max(1, cfg.max_epochs / 4);
    std::vector<size_t> order(static_cast<size_t>(n_train));
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(0.5, epoch / decay_interval);
        if (cfg.batch_size <= 0 || cfg.batch_size >= n_train) {
            step(X, T, lr);
        } else {
            std::shuffle(order.begin(), order.end(), rng);
            for (Eigen::Index start = 0; start < n_train; start += cfg.batch_size) {
                const Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size, n_train - start);
                Eigen::MatrixXd Xb(count, n_in), Tb(count, n_out);
                for (Eigen::Index i = 0; i < count; ++i) {
                    Xb.row(i) = X.row(static_cast<Eigen::Index>(order[start + i]));
                    Tb.row(i) = T.row(static_cast<Eigen::Index>(order[start + i]));
                }
                step(Xb, Tb, lr);
            }
        }

        const double train_perf = perf(X, T);
        const double val_perf = perf(Xv, Tv);
        if (!std::isfinite(train_perf) || !std::isfinite(val_perf))
            throw NonFiniteLoss("training diverged (non-finite loss); lower the learning rate");
        report.history.emplace_back(train_perf, val_perf);
        report.epochs_run = epoch + 1;

        if (val_perf < best_val) {
            best_val = val_perf;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            break;
        }
    }

    report.final_train_perf = report.history.back().first;
    report.final_val_perf = report.history.back().second;
    return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Serialization (.psfn, little-endian)

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    size_t pos = 0;

    void need(size_t count) const {
        if (pos + count > buf.size()) throw TruncatedFile("model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize(const MlpModel& model) {
    model.validate();
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'P', 'S', 'F', 'N'});
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(model.layer_sizes.size()));
    for (int s : model.layer_sizes) put_u32(out, static_cast<std::uint32_t>(s));
    out.push_back(static_cast<std::uint8_t>(model.hidden_activation));
    out.push_back(static_cast<std::uint8_t>(model.output_activation));
    put_u32(out, static_cast<std::uint32_t>(model.out_width));
    put_u32(out, static_cast<std::uint32_t>(model.out_height));
    put_f64(out, model.out_pitch_um);
    for (const auto& n : model.input_norm) {
        put_f64(out, n.offset);
        put_f64(out, n.scale);
    }
    auto put_layer = [&](const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
        for (Eigen::Index i = 0; i < b.size(); ++i) put_f64(out, b[i]);
    };
    put_layer(model.w1, model.b1);
    put_layer(model.w2, model.b2);
    return out;
}

MlpModel deserialize(const std::vector<std::uint8_t>& bytes) {
    Reader rd{bytes};
    rd.need(4);
    if (std::memcmp(bytes.data(), "PSFN", 4) != 0) throw BadMagic("not a .psfn model file");
    rd.pos = 4;
    const std::uint32_t version = rd.u32();
    if (version != 1) throw BadVersion("unsupported .psfn version " + std::to_string(version));

    MlpModel model;
    const std::uint32_t n_layers = rd.u32();
    if (n_layers != 3) throw BadVersion("expected 3 layers");
    for (std::uint32_t i = 0; i < n_layers; ++i)
        model.layer_sizes.push_back(static_cast<int>(rd.u32()));
    model.hidden_activation = static_cast<HiddenActivation>(rd.u8());
    model.output_activation = static_cast<OutputActivation>(rd.u8());
    model.out_width = static_cast<int>(rd.u32());
    model.out_height = static_cast<int>(rd.u32());
    model.out_pitch_um = rd.f64();
    for (auto& n : model.input_norm) {
        n.offset = rd.f64();
        n.scale = rd.f64();
    }
    auto read_layer = [&](Eigen::MatrixXd& w, Eigen::VectorXd& b, int rows, int cols) {
        w.resize(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = rd.f64();
        b.resize(rows);
        for (int r = 0; r < rows; ++r) b[r] = rd.f64();
    };
    read_layer(model.w1, model.b1, model.layer_sizes[1], model.layer_sizes[0]);
    read_layer(model.w2, model.b2, model.layer_sizes[2], model.layer_sizes[1]);
    model.validate();
    return model;
}

void save_model(const MlpModel& model, const std::string& path) {
    const auto bytes = serialize(model);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

MlpModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

SweepReport sweep(const PsfDataset& dataset, const std::vector<int>& hidden_sizes, int restarts,
                  const TrainConfig& cfg) {
    if (restarts < 2) throw Error("sweep requires restarts >= 2");
    if (hidden_sizes.empty()) throw Error("sweep requires at least one hidden size");

    auto parts = split_indices(dataset.samples.size(), {0.85, 0.15}, cfg.seed);
    if (parts[1].empty()) throw InsufficientData("dataset too small for a test split");
    const PsfDataset trainval = subset(dataset, parts[0]);
    const PsfDataset test = subset(dataset, parts[1]);
    TrainConfig base_cfg = cfg;
    // 70/15/15 overall once train() carves its validation share out of the 85%.
    base_cfg.validation_fraction = 0.15 / 0.85;
    const size_t n_test = test.samples.size();
    const size_t n_out = static_cast<size_t>(dataset.grid_width) * dataset.grid_height;

    SweepReport report;
    for (int hidden : hidden_sizes) {
        TrainConfig local = base_cfg;
        local.hidden_size = hidden;

        std::vector<double> perfs;
        // Running sum of per-sample predictions over successful restarts.
        std::vector<std::vector<double>> pred_sum(n_test, std::vector<double>(n_out, 0.0));
        for (int r = 0; r < restarts; ++r) {
            local.seed = cfg.seed + static_cast<std::uint64_t>(r);
            try {
                auto [model, train_report] = train(trainval, local);
                double acc = 0.0;
                for (size_t s = 0; s < n_test; ++s) {
                    const auto& [fp, grid] = test.samples[s];
                    const PsfGrid pred = forward(model, fp);
                    acc += loss(pred.values, grid.values);
                    for (size_t i = 0; i < n_out; ++i) pred_sum[s][i] += pred.values[i];
                }
                perfs.push_back(acc / static_cast<double>(n_test));
            } catch (const NonFiniteLoss&) {
                ++report.failed_restarts;
            }
        }

        SweepRow row;
        row.hidden = hidden;
        row.restarts_ok = static_cast<int>(perfs.size());
        if (!perfs.empty()) {
            const double k = static_cast<double>(perfs.size());
            double mean = 0.0;
            for (double p : perfs) mean += p;
            mean /= k;
            double var = 0.0;
            for (double p : perfs) var += (p - mean) * (p - mean);
            row.mean_perf = mean;
            row.std_perf = std::sqrt(var / k);

            double acc = 0.0;
            for (size_t s = 0; s < n_test; ++s) {
                std::vector<double> mean_pred(n_out);
                for (size_t i = 0; i < n_out; ++i) mean_pred[i] = pred_sum[s][i] / k;
                acc += loss(mean_pred, test.samples[s].second.values);
            }
            row.avg_output_perf = acc / static_cast<double>(n_test);
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace psfnet
