#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "psfnet/ann.hpp"
#include "psfnet/io.hpp"
#include "psfnet/metrics.hpp"
#include "psfnet/psf_ops.hpp"
#include "psfnet/render.hpp"
#include "psfnet/synth.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using Clock = std::chrono::steady_clock;

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n == 1) {
        out.push_back((lo + hi) / 2.0);
        return out;
    }
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct ManifestBuilder {
    psfnet::RunManifest m;
    Clock::time_point start = Clock::now();

    explicit ManifestBuilder(const std::string& command) {
        m.command = command;
        m.tool_version = kToolVersion;
    }
    void flag(const std::string& key, const std::string& value) { m.flags.emplace_back(key, value); }
    void flag(const std::string& key, double value) { flag(key, fmt(value)); }
    void flag(const std::string& key, int value) { flag(key, std::to_string(value)); }
    void input(const std::string& path) {
        m.input_digests.emplace_back(path, psfnet::file_digest(path));
    }
    void write(const std::string& out_path) {
        m.duration_s = std::chrono::duration<double>(Clock::now() - start).count();
        m.write(out_path);
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw psfnet::Error("cannot open " + path + " for writing");
    f << text;
}

// The paper's two series give only the sample totals; these factorizations
// (3x9x9 and 12x9x9) are reconstructions of their stated shapes: series A has
// high in-plane resolution and few defocus planes, series B the reverse.
psfnet::SamplingGrid series_a_grid() {
    return {linspace(-10.0, 10.0, 3), linspace(-3.0, 3.0, 9), linspace(0.0, 320.0, 9)};
}

psfnet::SamplingGrid series_b_grid() {
    return {linspace(-50.0, 50.0, 12), linspace(-3.0, 3.0, 9), linspace(0.0, 320.0, 9)};
}

psfnet::PsfDataset normalized(psfnet::PsfDataset data) {
    for (auto& [fp, grid] : data.samples) grid = psfnet::normalize_volume(grid);
    return data;
}

std::string sweep_csv(const psfnet::SweepReport& report) {
    std::ostringstream os;
    os << "hidden,restarts_ok,mean_perf,avg_output_perf,std_perf\n";
    for (const auto& row : report.rows)
        os << row.hidden << ',' << row.restarts_ok << ',' << fmt(row.mean_perf) << ','
           << fmt(row.avg_output_perf) << ',' << fmt(row.std_perf) << "\n";
    return os.str();
}

psfnet::Image grid_to_image(const psfnet::PsfGrid& grid) {
    psfnet::Image img(grid.width, grid.height, grid.pitch_um);
    img.values = grid.values;
    const double peak = *std::max_element(img.values.begin(), img.values.end());
    if (peak > 0.0)
        for (double& v : img.values) v /= peak;
    return img;
}

int run(int argc, char** argv) {
    CLI::App app{"PSF regression toolkit: synthesize PSF datasets, train the "
                 "field-parameter network, and render spatially variant lens blur"};
    app.require_subcommand(1);

    // --- synth-dataset -----------------------------------------------------
    auto* synth = app.add_subcommand("synth-dataset", "Generate a synthetic PSF dataset (.psfd)");
    std::string preset, dz_csv, r_csv, phi_csv, lens_spec_path, synth_out;
    int grid_size = 13;
    double pitch_um = 6.5;
    std::uint64_t seed = 1;
    double noise_floor = 2e-3;
    synth->add_option("--preset", preset, "series-a | series-b | series-ab");
    synth->add_option("--dz", dz_csv, "comma-separated defocus values (um)");
    synth->add_option("--r", r_csv, "comma-separated image heights (mm)");
    synth->add_option("--phi", phi_csv, "comma-separated azimuths (deg)");
    synth->add_option("--grid-size", grid_size, "PSF grid size in pixels (square)");
    synth->add_option("--pitch-um", pitch_um, "PSF pixel pitch in um");
    synth->add_option("--seed", seed, "lens noise seed");
    synth->add_option("--noise-floor", noise_floor, "per-pixel noise amplitude");
    synth->add_option("--lens-spec", lens_spec_path, "key=value lens spec file");
    synth->add_option("--out", synth_out, "output .psfd path")->required();

    // --- train -------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train a PSF model (.psfn) on a dataset");
    std::string train_dataset, train_out;
    psfnet::TrainConfig tc;
    train_cmd->add_option("dataset", train_dataset, "input .psfd")->required();
    train_cmd->add_option("--hidden", tc.hidden_size, "hidden neurons (default 80)");
    train_cmd->add_option("--epochs", tc.max_epochs, "max training epochs");
    train_cmd->add_option("--lr", tc.learning_rate, "learning rate");
    train_cmd->add_option("--momentum", tc.momentum, "momentum in [0,1)");
    train_cmd->add_option("--batch", tc.batch_size, "mini-batch size (0 = full batch)");
    train_cmd->add_option("--seed", tc.seed, "training seed");
    train_cmd->add_option("--out", train_out, "output .psfn path")->required();

    // --- predict -----------------------------------------------------------
    auto* predict = app.add_subcommand("predict", "Infer one PSF and write it as PGM + CSV");
    std::string predict_model, predict_out;
    double p_dz = 0.0, p_r = 0.0, p_phi = 0.0;
    predict->add_option("model", predict_model, "input .psfn")->required();
    predict->add_option("--dz", p_dz, "defocus (um)");
    predict->add_option("--r", p_r, "image height (mm)");
    predict->add_option("--phi", p_phi, "azimuth (deg)");
    predict->add_option("--out", predict_out, "output .pgm path")->required();

    // --- apply -------------------------------------------------------------
    auto* apply = app.add_subcommand("apply", "Convolve an image with the spatially variant PSF");
    std::string apply_model, apply_image, apply_out, dzmap_path;
    double a_dz = 0.0, dzmap_offset = 0.0, dzmap_scale = 1.0;
    double center_x = -1.0, center_y = -1.0, image_pitch = 6.5;
    int tile_px = 32;
    apply->add_option("model", apply_model, "input .psfn")->required();
    apply->add_option("image", apply_image, "input PGM image")->required();
    apply->add_option("--dz", a_dz, "constant defocus (um)");
    apply->add_option("--dzmap", dzmap_path, "per-pixel defocus as 16-bit PGM");
    apply->add_option("--dzmap-offset", dzmap_offset, "um at raw value 0");
    apply->add_option("--dzmap-scale", dzmap_scale, "um per unit of normalized raw value");
    apply->add_option("--center-x", center_x, "optical axis x (px, default image center)");
    apply->add_option("--center-y", center_y, "optical axis y (px, default image center)");
    apply->add_option("--pitch-um", image_pitch, "image pixel pitch in um");
    apply->add_option("--tile-px", tile_px, "kernel inference tile size");
    apply->add_option("--out", apply_out, "output PGM path")->required();

    // --- depth-apply -------------------------------------------------------
    auto* depth = app.add_subcommand("depth-apply",
                                     "Render a checkerboard under a linear defocus gradient");
    std::string depth_model, depth_out;
    int d_size = 512, cell_px = 32, d_tile = 32;
    double dz_left = 50.0, dz_right = -50.0;
    double d_center_x = -1.0, d_center_y = -1.0, d_pitch = 6.5;
    depth->add_option("model", depth_model, "input .psfn")->required();
    depth->add_option("--grid-size", d_size, "checkerboard image size (square, px)");
    depth->add_option("--cell-px", cell_px, "checkerboard cell size (px)");
    depth->add_option("--dz-left", dz_left, "defocus at left edge (um)");
    depth->add_option("--dz-right", dz_right, "defocus at right edge (um)");
    depth->add_option("--center-x", d_center_x, "optical axis x (px, default image center)");
    depth->add_option("--center-y", d_center_y, "optical axis y (px, default image center)");
    depth->add_option("--pitch-um", d_pitch, "image pixel pitch in um");
    depth->add_option("--tile-px", d_tile, "kernel inference tile size");
    depth->add_option("--out", depth_out, "output PGM path")->required();

    // --- sweep -------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Hidden-size sweep with restarts, CSV report");
    std::string sweep_dataset, sweep_out, hidden_list = "8,16,32,64,96,128,192,256,448";
    int restarts = 10;
    psfnet::TrainConfig sc;
    // Sweep defaults trade single-model polish for many short restarts: small
    // mini-batches and a hotter rate keep 9 sizes x 10 restarts tractable.
    sc.max_epochs = 300;
    sc.learning_rate = 0.01;
    sc.batch_size = 32;
    sweep_cmd->add_option("dataset", sweep_dataset, "input .psfd")->required();
    sweep_cmd->add_option("--hidden-list", hidden_list, "comma-separated hidden sizes");
    sweep_cmd->add_option("--restarts", restarts, "training restarts per size (>= 2)");
    sweep_cmd->add_option("--epochs", sc.max_epochs, "max training epochs");
    sweep_cmd->add_option("--lr", sc.learning_rate, "learning rate");
    sweep_cmd->add_option("--batch", sc.batch_size, "mini-batch size (0 = full batch)");
    sweep_cmd->add_option("--seed", sc.seed, "base seed; restart r uses seed + r");
    sweep_cmd->add_option("--out", sweep_out, "output CSV path")->required();

    // --- eval --------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Score a model against a dataset");
    std::string eval_model, eval_dataset, eval_out;
    eval_cmd->add_option("model", eval_model, "input .psfn")->required();
    eval_cmd->add_option("dataset", eval_dataset, "input .psfd")->required();
    eval_cmd->add_option("--out", eval_out, "output CSV path (also printed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are exit 1
    }

    if (synth->parsed()) {
        ManifestBuilder mb("synth-dataset");
        psfnet::SynthLensSpec lens;
        if (!lens_spec_path.empty()) {
            std::ifstream f(lens_spec_path);
            if (!f) throw psfnet::Error("cannot open " + lens_spec_path);
            std::stringstream ss;
            ss << f.rdbuf();
            lens = psfnet::spec_from_text(ss.str());
            mb.input(lens_spec_path);
        }
        lens.seed = seed;
        lens.noise_floor = noise_floor;

        psfnet::PsfDataset data;
        if (preset == "series-a") {
            data = psfnet::generate_dataset(lens, series_a_grid(), grid_size, grid_size, pitch_um);
        } else if (preset == "series-b") {
            data = psfnet::generate_dataset(lens, series_b_grid(), grid_size, grid_size, pitch_um);
        } else if (preset == "series-ab") {
            data = psfnet::generate_dataset(lens, series_a_grid(), grid_size, grid_size, pitch_um);
            auto b = psfnet::generate_dataset(lens, series_b_grid(), grid_size, grid_size, pitch_um);
            for (auto& s : b.samples) data.samples.push_back(std::move(s));
        } else if (!preset.empty()) {
            std::cerr << "unknown preset: " << preset << "\n";
            return 1;
        } else {
            psfnet::SamplingGrid grid{parse_doubles(dz_csv), parse_doubles(r_csv),
                                      parse_doubles(phi_csv)};
            if (grid.size() < 1) {
                std::cerr << "either --preset or non-empty --dz/--r/--phi are required\n";
                return 1;
            }
            data = psfnet::generate_dataset(lens, grid, grid_size, grid_size, pitch_um);
        }
        data = normalized(std::move(data));
        psfnet::save_dataset(data, synth_out);
        mb.flag("preset", preset);
        mb.flag("grid-size", grid_size);
        mb.flag("pitch-um", pitch_um);
        mb.flag("noise-floor", noise_floor);
        mb.flag("out", synth_out);
        mb.m.seed = seed;
        mb.write(synth_out);
        std::cout << "wrote " << data.samples.size() << " samples to " << synth_out << "\n";
    } else if (train_cmd->parsed()) {
        ManifestBuilder mb("train");
        mb.input(train_dataset);
        const auto data = psfnet::load_dataset(train_dataset);
        auto [model, report] = psfnet::train(data, tc);
        psfnet::save_model(model, train_out);

        std::ostringstream hist;
        hist << "epoch,train_perf,val_perf\n";
        for (size_t e = 0; e < report.history.size(); ++e)
            hist << e << ',' << fmt(report.history[e].first) << ','
                 << fmt(report.history[e].second) << "\n";
        write_text(train_out + ".history.csv", hist.str());

        mb.flag("hidden", tc.hidden_size);
        mb.flag("epochs", tc.max_epochs);
        mb.flag("lr", tc.learning_rate);
        mb.flag("momentum", tc.momentum);
        mb.flag("out", train_out);
        mb.m.seed = tc.seed;
        mb.write(train_out);
        std::cout << "final train perf " << fmt(report.final_train_perf) << ", val perf "
                  << fmt(report.final_val_perf) << " after " << report.epochs_run << " epochs\n";
    } else if (predict->parsed()) {
        ManifestBuilder mb("predict");
        mb.input(predict_model);
        const auto model = psfnet::load_model(predict_model);
        const psfnet::PsfGrid psf = psfnet::forward(model, psfnet::FieldPoint(p_dz, p_r, p_phi));
        psfnet::save_pgm(grid_to_image(psf), predict_out);

        std::ostringstream csv;
        for (int y = 0; y < psf.height; ++y) {
            for (int x = 0; x < psf.width; ++x)
                csv << (x ? "," : "") << fmt(psf.at(x, y));
            csv << "\n";
        }
        write_text(predict_out + ".csv", csv.str());
        mb.flag("dz", p_dz);
        mb.flag("r", p_r);
        mb.flag("phi", p_phi);
        mb.flag("out", predict_out);
        mb.write(predict_out);
    } else if (apply->parsed()) {
        ManifestBuilder mb("apply");
        mb.input(apply_model);
        mb.input(apply_image);
        const auto model = psfnet::load_model(apply_model);
        const auto image = psfnet::load_pgm(apply_image, image_pitch);

        psfnet::DefocusMap dzmap(image.width, image.height, a_dz);
        if (!dzmap_path.empty()) {
            mb.input(dzmap_path);
            const auto raw = psfnet::load_pgm(dzmap_path);
            if (raw.width != image.width || raw.height != image.height)
                throw psfnet::DimensionMismatch("defocus map dimensions do not match image");
            for (size_t i = 0; i < raw.values.size(); ++i)
                dzmap.dz_um[i] = dzmap_offset + dzmap_scale * raw.values[i];
        }
        psfnet::FieldMapping mapping{center_x < 0 ? (image.width - 1) / 2.0 : center_x,
                                     center_y < 0 ? (image.height - 1) / 2.0 : center_y,
                                     image_pitch};
        psfnet::ConvolveStats stats;
        const auto out = psfnet::convolve_spatially_variant(image, model, mapping, dzmap, tile_px,
                                                            &stats);
        psfnet::save_pgm(out, apply_out);
        if (stats.clamped_dz_count > 0)
            std::cerr << "warning: " << stats.clamped_dz_count
                      << " defocus values clamped to the trained envelope\n";
        mb.flag("dz", a_dz);
        mb.flag("dzmap", dzmap_path);
        mb.flag("tile-px", tile_px);
        mb.flag("pitch-um", image_pitch);
        mb.flag("out", apply_out);
        mb.write(apply_out);
    } else if (depth->parsed()) {
        ManifestBuilder mb("depth-apply");
        mb.input(depth_model);
        const auto model = psfnet::load_model(depth_model);
        const auto board = psfnet::checkerboard(d_size, d_size, cell_px, 0.1, 0.9);
        psfnet::Image image = board;
        image.pitch_um = d_pitch;
        const auto dzmap = psfnet::linear_depth_gradient(d_size, d_size, dz_left, dz_right);
        psfnet::FieldMapping mapping{d_center_x < 0 ? (d_size - 1) / 2.0 : d_center_x,
                                     d_center_y < 0 ? (d_size - 1) / 2.0 : d_center_y, d_pitch};
        const auto out = psfnet::convolve_spatially_variant(image, model, mapping, dzmap, d_tile);
        psfnet::save_pgm(out, depth_out);
        mb.flag("grid-size", d_size);
        mb.flag("cell-px", cell_px);
        mb.flag("dz-left", dz_left);
        mb.flag("dz-right", dz_right);
        mb.flag("tile-px", d_tile);
        mb.flag("out", depth_out);
        mb.write(depth_out);
    } else if (sweep_cmd->parsed()) {
        ManifestBuilder mb("sweep");
        mb.input(sweep_dataset);
        const auto data = psfnet::load_dataset(sweep_dataset);
        const auto report = psfnet::sweep(data, parse_ints(hidden_list), restarts, sc);
        write_text(sweep_out, sweep_csv(report));
        if (report.failed_restarts > 0)
            std::cerr << "warning: " << report.failed_restarts << " restarts failed\n";
        mb.flag("hidden-list", hidden_list);
        mb.flag("restarts", restarts);
        mb.flag("epochs", sc.max_epochs);
        mb.flag("out", sweep_out);
        mb.m.seed = sc.seed;
        mb.write(sweep_out);
        std::cout << sweep_csv(report);
    } else if (eval_cmd->parsed()) {
        ManifestBuilder mb("eval");
        mb.input(eval_model);
        mb.input(eval_dataset);
        const auto model = psfnet::load_model(eval_model);
        const auto data = psfnet::load_dataset(eval_dataset);
        const auto summary = psfnet::evaluate(model, data);
        const std::string row = "n,mean_eq2,max_eq2,per_pixel_rmse\n" + summary.csv_row() + "\n";
        std::cout << row;
        if (!eval_out.empty()) {
            write_text(eval_out, row);
            mb.flag("out", eval_out);
            mb.write(eval_out);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const psfnet::NonFiniteLoss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const psfnet::PitchMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const psfnet::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const psfnet::BadMagic& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const psfnet::BadVersion& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const psfnet::TruncatedFile& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
