#include "psfnet/render.hpp"

#include <algorithm>
#include <cmath>

namespace psfnet {

namespace {
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
constexpr double kDzEnvelopeUm = 50.0;  // trained measurement envelope
}  // namespace

FieldPoint pixel_to_field(const FieldMapping& mapping, double x, double y, double dz_um) {
    const double dx = x - mapping.cx;
    const double dy = mapping.cy - y;  // image +y is up
    const double r_mm = mapping.pitch_um * std::hypot(dx, dy) / 1000.0;
    if (dx == 0.0 && dy == 0.0) return FieldPoint(dz_um, 0.0, 0.0);
    return FieldPoint(dz_um, r_mm, std::atan2(dy, dx) * kRadToDeg);
}

double defocus_from_depth(double object_distance_mm, double focal_length_mm,
                          double focus_distance_mm) {
    auto image_distance = [f = focal_length_mm](double o) {
        if (std::isinf(o)) return f;
        if (o <= f) throw BehindFocalPlane();
        return f * o / (o - f);
    };
    return (image_distance(object_distance_mm) - image_distance(focus_distance_mm)) * 1000.0;
}

DefocusMap linear_depth_gradient(int width, int height, double dz_left_um, double dz_right_um) {
    if (width < 2) throw Error("linear_depth_gradient: width must be >= 2");
    DefocusMap map(width, height);
    for (int x = 0; x < width; ++x) {
        const double dz = dz_left_um + (dz_right_um - dz_left_um) * x / (width - 1);
        for (int y = 0; y < height; ++y) map.dz_um[static_cast<size_t>(y) * width + x] = dz;
    }
    return map;
}

Image checkerboard(int width, int height, int cell_px, double low, double high) {
    if (cell_px < 1) throw Error("checkerboard: cell_px must be >= 1");
    Image img(width, height, 1.0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img.at(x, y) = ((x / cell_px + y / cell_px) % 2 == 0) ? high : low;
    return img;
}

Image convolve_spatially_variant(const Image& image, const MlpModel& model,
                                 const FieldMapping& mapping, const DefocusMap& dzmap, int tile_px,
                                 ConvolveStats* stats) {
    if (model.out_pitch_um != image.pitch_um)
        throw PitchMismatch("model kernel pitch does not match image pitch");
    if (dzmap.width != image.width || dzmap.height != image.height)
        throw DimensionMismatch("defocus map dimensions do not match image");
    if (tile_px < 1) throw Error("tile_px must be >= 1");

    const int w = image.width, h = image.height;
    const int kw = model.out_width, kh = model.out_height;
    const int kcx = kw / 2, kcy = kh / 2;
    const int nx = (w + tile_px - 1) / tile_px;
    const int ny = (h + tile_px - 1) / tile_px;

    // Tile-center pixel coordinates.
    std::vector<int> cxs(nx), cys(ny);
    for (int i = 0; i < nx; ++i) cxs[i] = std::min(i * tile_px + tile_px / 2, w - 1);
    for (int j = 0; j < ny; ++j) cys[j] = std::min(j * tile_px + tile_px / 2, h - 1);

    // One kernel per tile, inferred at the tile-center pixel's field point.
    int clamped = 0;
    std::vector<std::vector<double>> kernels(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double dz = dzmap.at(cxs[i], cys[j]);
            if (dz < -kDzEnvelopeUm || dz > kDzEnvelopeUm) {
                dz = std::clamp(dz, -kDzEnvelopeUm, kDzEnvelopeUm);
                ++clamped;
            }
            const FieldPoint fp = pixel_to_field(mapping, cxs[i], cys[j], dz);
            kernels[static_cast<size_t>(j) * nx + i] = forward(model, fp).values;
        }
    }
    if (stats) stats->clamped_dz_count = clamped;

    // Per-pixel bilinear blend weights between the surrounding tile centers;
    // tile_px = 1 makes every pixel its own center so the blend degenerates to
    // exact per-pixel inference.
    auto bracket = [](const std::vector<int>& centers, int p, int& lo, double& frac) {
        const int n = static_cast<int>(centers.size());
        if (p <= centers.front()) {
            lo = 0;
            frac = 0.0;
        } else if (p >= centers.back()) {
            lo = n - 1;
            frac = 0.0;
        } else {
            lo = 0;
            while (lo + 1 < n && centers[lo + 1] <= p) ++lo;
            frac = (p == centers[lo])
                       ? 0.0
                       : static_cast<double>(p - centers[lo]) / (centers[lo + 1] - centers[lo]);
        }
    };

    Image out(w, h, image.pitch_um);
    for (int y = 0; y < h; ++y) {
        int j0;
        double fy;
        bracket(cys, y, j0, fy);
        const int j1 = (fy > 0.0) ? j0 + 1 : j0;
        for (int x = 0; x < w; ++x) {
            int i0;
            double fx;
            bracket(cxs, x, i0, fx);
            const int i1 = (fx > 0.0) ? i0 + 1 : i0;

            const double w00 = (1.0 - fx) * (1.0 - fy);
            const double w10 = fx * (1.0 - fy);
            const double w01 = (1.0 - fx) * fy;
            const double w11 = fx * fy;
            const double* k00 = kernels[static_cast<size_t>(j0) * nx + i0].data();
            const double* k10 = kernels[static_cast<size_t>(j0) * nx + i1].data();
            const double* k01 = kernels[static_cast<size_t>(j1) * nx + i0].data();
            const double* k11 = kernels[static_cast<size_t>(j1) * nx + i1].data();

            double acc = 0.0;
            for (int ky = 0; ky < kh; ++ky) {
                const int sy = std::clamp(y - (ky - kcy), 0, h - 1);
                const size_t krow = static_cast<size_t>(ky) * kw;
                for (int kx = 0; kx < kw; ++kx) {
                    const size_t t = krow + kx;
                    const double kv =
                        w00 * k00[t] + w10 * k10[t] + w01 * k01[t] + w11 * k11[t];
                    const int sx = std::clamp(x - (kx - kcx), 0, w - 1);
                    acc += kv * image.at(sx, sy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

}  // namespace psfnet
