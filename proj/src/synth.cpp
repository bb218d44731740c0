#include "psfnet/synth.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

namespace psfnet {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// splitmix64; stable across platforms.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform [0,1) from (seed, pixel index); independent of iteration order.
double value_noise(std::uint64_t seed, std::uint64_t index) {
    return static_cast<double>(mix64(seed ^ mix64(index)) >> 11) * 0x1.0p-53;
}

std::uint64_t bits_of(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, 8);
    return b;
}

}  // namespace

void SynthLensSpec::validate() const {
    if (focal_length_mm <= 0.0) throw Error("focal_length_mm must be > 0");
    if (base_sigma_um <= 0.0) throw Error("base_sigma_um must be > 0");
    if (defocus_blur_rate < 0.0 || astigmatism_rate < 0.0 || coma_skew_rate < 0.0 ||
        asymmetry_eps < 0.0 || noise_floor < 0.0)
        throw Error("lens rate/amplitude fields must be >= 0");
}

PsfGrid synth_psf(const SynthLensSpec& spec, const FieldPoint& fp, int width, int height,
                  double pitch_um) {
    spec.validate();
    if (width < 3 || height < 3) throw DimensionMismatch("synth_psf: grid must be at least 3x3");

    // Field curvature shifts the best-focus plane with image height.
    const double delta = fp.dz_um - spec.field_curvature_um_per_mm2 * fp.r_mm * fp.r_mm;
    const double absR = std::fabs(fp.r_mm);
    const double sgn = (delta > 0.0) ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
    const double blur = spec.defocus_blur_rate * std::fabs(delta) * (1.0 + sgn * spec.asymmetry_eps);
    const double sigma_r = spec.base_sigma_um * (1.0 + spec.astigmatism_rate * absR) + blur;
    const double sigma_t = spec.base_sigma_um + blur;
    const double skew = spec.coma_skew_rate * absR;

    const double phi = fp.phi_deg * kDegToRad;
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;

    PsfGrid out(width, height, pitch_um);
    for (int y = 0; y < height; ++y) {
        // Image +y is up: row 0 is the top of the grid.
        const double dy = (cy - y) * pitch_um;
        for (int x = 0; x < width; ++x) {
            const double dx = (x - cx) * pitch_um;
            const double ur = dx * cphi + dy * sphi;   // radial direction at azimuth phi
            const double ut = -dx * sphi + dy * cphi;  // tangential
            const double q = (ur / sigma_r) * (ur / sigma_r) + (ut / sigma_t) * (ut / sigma_t);
            // Skew pushes mass radially outward; 1 + tanh stays non-negative.
            double v = std::exp(-0.5 * q) * (1.0 + std::tanh(skew * ur / sigma_r));
            if (spec.noise_floor > 0.0) {
                // Hash the field point in as well so each sample sees its own
                // pattern; a pattern shared across the corpus would be a
                // learnable constant rather than noise.
                const std::uint64_t idx = static_cast<std::uint64_t>(y) * width + x;
                const std::uint64_t fph =
                    mix64(bits_of(fp.dz_um)) ^ mix64(bits_of(fp.r_mm) + 1) ^
                    mix64(bits_of(fp.phi_deg) + 2);
                v += spec.noise_floor * value_noise(spec.seed ^ fph, idx);
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

PsfDataset generate_dataset(const SynthLensSpec& spec, const SamplingGrid& grid, int width,
                            int height, double pitch_um) {
    if (grid.size() < 1) throw Error("sampling grid is empty");
    PsfDataset data;
    for (double dz : grid.dz_values)
        for (double r : grid.r_values)
            for (double phi : grid.phi_values) {
                FieldPoint fp(dz, r, phi);
                data.push(fp, synth_psf(spec, fp, width, height, pitch_um));
            }
    return data;
}

std::string spec_to_text(const SynthLensSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << "focal_length_mm=" << spec.focal_length_mm << "\n"
       << "seed=" << spec.seed << "\n"
       << "base_sigma_um=" << spec.base_sigma_um << "\n"
       << "defocus_blur_rate=" << spec.defocus_blur_rate << "\n"
       << "field_curvature_um_per_mm2=" << spec.field_curvature_um_per_mm2 << "\n"
       << "astigmatism_rate=" << spec.astigmatism_rate << "\n"
       << "coma_skew_rate=" << spec.coma_skew_rate << "\n"
       << "asymmetry_eps=" << spec.asymmetry_eps << "\n"
       << "noise_floor=" << spec.noise_floor << "\n";
    return os.str();
}

SynthLensSpec spec_from_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    SynthLensSpec spec;
    auto get = [&](const char* key, double& dst) {
        auto it = kv.find(key);
        if (it != kv.end()) dst = std::stod(it->second);
    };
    get("focal_length_mm", spec.focal_length_mm);
    if (auto it = kv.find("seed"); it != kv.end()) spec.seed = std::stoull(it->second);
    get("base_sigma_um", spec.base_sigma_um);
    get("defocus_blur_rate", spec.defocus_blur_rate);
    get("field_curvature_um_per_mm2", spec.field_curvature_um_per_mm2);
    get("astigmatism_rate", spec.astigmatism_rate);
    get("coma_skew_rate", spec.coma_skew_rate);
    get("asymmetry_eps", spec.asymmetry_eps);
    get("noise_floor", spec.noise_floor);
    spec.validate();
    return spec;
}

}  // namespace psfnet
