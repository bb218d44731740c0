#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psfnet/ann.hpp"
#include "psfnet/io.hpp"
#include "psfnet/metrics.hpp"
#include "psfnet/psf_ops.hpp"
#include "psfnet/render.hpp"
#include "psfnet/synth.hpp"

namespace py = pybind11;
using namespace psfnet;

namespace {

py::array_t<double> grid_array(const PsfGrid& grid) {
    py::array_t<double> arr({grid.height, grid.width});
    std::copy(grid.values.begin(), grid.values.end(), arr.mutable_data());
    return arr;
}

PsfGrid grid_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                        double pitch_um) {
    if (arr.ndim() != 2) throw DimensionMismatch("expected a 2D array");
    PsfGrid grid(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)), pitch_um);
    std::copy(arr.data(), arr.data() + arr.size(), grid.values.begin());
    return grid;
}

py::array_t<double> image_array(const Image& img) {
    py::array_t<double> arr({img.height, img.width});
    std::copy(img.values.begin(), img.values.end(), arr.mutable_data());
    return arr;
}

Image image_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                       double pitch_um) {
    if (arr.ndim() != 2) throw DimensionMismatch("expected a 2D array");
    Image img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)), pitch_um);
    std::copy(arr.data(), arr.data() + arr.size(), img.values.begin());
    return img;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "PSF regression toolkit: synthetic lens datasets, field-parameter "
              "network training and spatially variant convolution";

    py::register_exception<AllZeroGrid>(m, "AllZeroGridError");
    py::register_exception<DimensionMismatch>(m, "DimensionMismatchError");
    py::register_exception<UpsampleNotSupported>(m, "UpsampleNotSupportedError");
    py::register_exception<PitchMismatch>(m, "PitchMismatchError");
    py::register_exception<BehindFocalPlane>(m, "BehindFocalPlaneError");
    py::register_exception<InsufficientData>(m, "InsufficientDataError");
    py::register_exception<NonFiniteLoss>(m, "NonFiniteLossError");
    py::register_exception<BadMagic>(m, "BadMagicError");
    py::register_exception<BadVersion>(m, "BadVersionError");
    py::register_exception<TruncatedFile>(m, "TruncatedFileError");

    py::class_<FieldPoint>(m, "FieldPoint")
        .def(py::init<double, double, double>(), py::arg("dz_um"), py::arg("r_mm"),
             py::arg("phi_deg"))
        .def_readonly("dz_um", &FieldPoint::dz_um)
        .def_readonly("r_mm", &FieldPoint::r_mm)
        .def_readonly("phi_deg", &FieldPoint::phi_deg)
        .def("__repr__", [](const FieldPoint& fp) {
            return "FieldPoint(dz_um=" + std::to_string(fp.dz_um) +
                   ", r_mm=" + std::to_string(fp.r_mm) +
                   ", phi_deg=" + std::to_string(fp.phi_deg) + ")";
        });

    py::class_<PsfGrid>(m, "PsfGrid")
        .def(py::init([](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                         double pitch_um) { return grid_from_array(a, pitch_um); }),
             py::arg("values"), py::arg("pitch_um") = 1.0)
        .def_readonly("width", &PsfGrid::width)
        .def_readonly("height", &PsfGrid::height)
        .def_readonly("pitch_um", &PsfGrid::pitch_um)
        .def_property_readonly("values", &grid_array)
        .def("sum", &PsfGrid::sum);

    py::class_<PsfDataset>(m, "PsfDataset")
        .def(py::init<>())
        .def_readonly("grid_width", &PsfDataset::grid_width)
        .def_readonly("grid_height", &PsfDataset::grid_height)
        .def_readonly("pitch_um", &PsfDataset::pitch_um)
        .def("__len__", &PsfDataset::size)
        .def("push", &PsfDataset::push)
        .def("field_point", [](const PsfDataset& d, size_t i) { return d.samples.at(i).first; })
        .def("grid", [](const PsfDataset& d, size_t i) { return d.samples.at(i).second; });

    m.def("centroid", &centroid);
    m.def("center_and_crop", &center_and_crop, py::arg("grid"), py::arg("out_size"));
    m.def("resample", &resample, py::arg("grid"), py::arg("target_pitch_um"),
          py::arg("target_size"));
    m.def("normalize_volume", &normalize_volume);
    m.def("flatten", &flatten);
    m.def("unflatten", &unflatten, py::arg("values"), py::arg("width"), py::arg("height"),
          py::arg("pitch_um"));

    py::class_<SynthLensSpec>(m, "SynthLensSpec")
        .def(py::init<>())
        .def_readwrite("focal_length_mm", &SynthLensSpec::focal_length_mm)
        .def_readwrite("seed", &SynthLensSpec::seed)
        .def_readwrite("base_sigma_um", &SynthLensSpec::base_sigma_um)
        .def_readwrite("defocus_blur_rate", &SynthLensSpec::defocus_blur_rate)
        .def_readwrite("field_curvature_um_per_mm2", &SynthLensSpec::field_curvature_um_per_mm2)
        .def_readwrite("astigmatism_rate", &SynthLensSpec::astigmatism_rate)
        .def_readwrite("coma_skew_rate", &SynthLensSpec::coma_skew_rate)
        .def_readwrite("asymmetry_eps", &SynthLensSpec::asymmetry_eps)
        .def_readwrite("noise_floor", &SynthLensSpec::noise_floor);

    py::class_<SamplingGrid>(m, "SamplingGrid")
        .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>>(),
             py::arg("dz_values"), py::arg("r_values"), py::arg("phi_values"))
        .def("__len__", &SamplingGrid::size);

    m.def("synth_psf", &synth_psf, py::arg("spec"), py::arg("field_point"), py::arg("width"),
          py::arg("height"), py::arg("pitch_um"));
    m.def("generate_dataset", &generate_dataset, py::arg("spec"), py::arg("grid"),
          py::arg("width"), py::arg("height"), py::arg("pitch_um"));

    py::enum_<HiddenActivation>(m, "HiddenActivation")
        .value("TANH", HiddenActivation::Tanh)
        .value("SIGMOID", HiddenActivation::Sigmoid)
        .value("RELU", HiddenActivation::Relu);
    py::enum_<OutputActivation>(m, "OutputActivation")
        .value("LINEAR", OutputActivation::Linear)
        .value("SIGMOID", OutputActivation::Sigmoid);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("hidden_size", &TrainConfig::hidden_size)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("validation_fraction", &TrainConfig::validation_fraction)
        .def_readwrite("early_stop_patience", &TrainConfig::early_stop_patience)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("hidden_activation", &TrainConfig::hidden_activation)
        .def_readwrite("output_activation", &TrainConfig::output_activation)
        .def_readwrite("phi_sincos", &TrainConfig::phi_sincos);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("final_train_perf", &TrainReport::final_train_perf)
        .def_readonly("final_val_perf", &TrainReport::final_val_perf)
        .def_readonly("epochs_run", &TrainReport::epochs_run)
        .def_readonly("history", &TrainReport::history)
        .def_readonly("seed", &TrainReport::seed);

    py::class_<MlpModel>(m, "MlpModel")
        .def_readonly("layer_sizes", &MlpModel::layer_sizes)
        .def_readonly("out_width", &MlpModel::out_width)
        .def_readonly("out_height", &MlpModel::out_height)
        .def_readonly("out_pitch_um", &MlpModel::out_pitch_um);

    m.def("train", &train, py::arg("dataset"), py::arg("config"));
    m.def("forward", &forward, py::arg("model"), py::arg("field_point"));
    m.def("loss", &loss, py::arg("prediction"), py::arg("target"));
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("hidden", &SweepRow::hidden)
        .def_readonly("restarts_ok", &SweepRow::restarts_ok)
        .def_readonly("mean_perf", &SweepRow::mean_perf)
        .def_readonly("avg_output_perf", &SweepRow::avg_output_perf)
        .def_readonly("std_perf", &SweepRow::std_perf);
    py::class_<SweepReport>(m, "SweepReport")
        .def_readonly("rows", &SweepReport::rows)
        .def_readonly("failed_restarts", &SweepReport::failed_restarts);
    m.def("sweep", &sweep, py::arg("dataset"), py::arg("hidden_sizes"), py::arg("restarts"),
          py::arg("config"));

    py::class_<EvalSummary>(m, "EvalSummary")
        .def_readonly("n_samples", &EvalSummary::n_samples)
        .def_readonly("mean_eq2", &EvalSummary::mean_eq2)
        .def_readonly("max_eq2", &EvalSummary::max_eq2)
        .def_readonly("per_pixel_rmse", &EvalSummary::per_pixel_rmse);
    m.def("eq2_distance", &eq2_distance);
    m.def("per_pixel_rmse", &per_pixel_rmse);
    m.def("evaluate", &evaluate, py::arg("model"), py::arg("dataset"));

    py::class_<Image>(m, "Image")
        .def(py::init([](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                         double pitch_um) { return image_from_array(a, pitch_um); }),
             py::arg("values"), py::arg("pitch_um") = 1.0)
        .def_readonly("width", &Image::width)
        .def_readonly("height", &Image::height)
        .def_readonly("pitch_um", &Image::pitch_um)
        .def_property_readonly("values", &image_array);

    py::class_<FieldMapping>(m, "FieldMapping")
        .def(py::init([](double cx, double cy, double pitch_um) {
                 return FieldMapping{cx, cy, pitch_um};
             }),
             py::arg("cx"), py::arg("cy"), py::arg("pitch_um"))
        .def_readwrite("cx", &FieldMapping::cx)
        .def_readwrite("cy", &FieldMapping::cy)
        .def_readwrite("pitch_um", &FieldMapping::pitch_um);

    py::class_<DefocusMap>(m, "DefocusMap")
        .def(py::init([](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
            if (a.ndim() != 2) throw DimensionMismatch("expected a 2D array");
            DefocusMap map(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
            std::copy(a.data(), a.data() + a.size(), map.dz_um.begin());
            return map;
        }))
        .def_readonly("width", &DefocusMap::width)
        .def_readonly("height", &DefocusMap::height);

    m.def("pixel_to_field", &pixel_to_field, py::arg("mapping"), py::arg("x"), py::arg("y"),
          py::arg("dz_um"));
    m.def("defocus_from_depth", &defocus_from_depth, py::arg("object_distance_mm"),
          py::arg("focal_length_mm"), py::arg("focus_distance_mm"));
    m.def("linear_depth_gradient", &linear_depth_gradient, py::arg("width"), py::arg("height"),
          py::arg("dz_left_um"), py::arg("dz_right_um"));
    m.def("checkerboard", &checkerboard, py::arg("width"), py::arg("height"), py::arg("cell_px"),
          py::arg("low"), py::arg("high"));
    m.def(
        "convolve_spatially_variant",
        [](const Image& image, const MlpModel& model, const FieldMapping& mapping,
           const DefocusMap& dzmap, int tile_px) {
            return convolve_spatially_variant(image, model, mapping, dzmap, tile_px);
        },
        py::arg("image"), py::arg("model"), py::arg("mapping"), py::arg("dzmap"),
        py::arg("tile_px"));

    m.def("save_dataset", &save_dataset);
    m.def("load_dataset", &load_dataset);
    m.def("save_pgm", &save_pgm, py::arg("image"), py::arg("path"), py::arg("maxval") = 65535);
    m.def("load_pgm", &load_pgm, py::arg("path"), py::arg("pitch_um") = 1.0);
}
