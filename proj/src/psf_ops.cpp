#include "psfnet/psf_ops.hpp"

#include <algorithm>
#include <cmath>

namespace psfnet {

std::pair<double, double> centroid(const PsfGrid& grid) {
    double total = 0.0, mx = 0.0, my = 0.0;
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            double v = grid.at(x, y);
            total += v;
            mx += v * x;
            my += v * y;
        }
    }
    if (total <= 0.0) throw AllZeroGrid();
    return {mx / total, my / total};
}

PsfGrid center_and_crop(const PsfGrid& grid, int out_size) {
    auto [cx, cy] = centroid(grid);
    int cxi = static_cast<int>(std::lround(cx));
    int cyi = static_cast<int>(std::lround(cy));
    const int ox = out_size / 2;  // center pixel of the output window
    const int oy = out_size / 2;

    auto extract = [&](int wx, int wy) {
        PsfGrid out(out_size, out_size, grid.pitch_um);
        for (int y = 0; y < out_size; ++y) {
            const int sy = y - oy + wy;
            if (sy < 0 || sy >= grid.height) continue;
            for (int x = 0; x < out_size; ++x) {
                const int sx = x - ox + wx;
                if (sx < 0 || sx >= grid.width) continue;
                out.at(x, y) = grid.at(sx, sy);
            }
        }
        return out;
    };

    // Cropping truncates tails asymmetrically, which can drag the centroid of
    // the window away from where the full-grid centroid pointed.  Re-center on
    // the windowed centroid until the placement is a fixed point.
    PsfGrid out = extract(cxi, cyi);
    for (int iter = 0; iter < 32; ++iter) {
        if (out.sum() <= 0.0) break;  // window slid off the mass; keep last
        auto [wx, wy] = centroid(out);
        const int dx = static_cast<int>(std::lround(wx)) - ox;
        const int dy = static_cast<int>(std::lround(wy)) - oy;
        if (dx == 0 && dy == 0) break;
        cxi += dx;
        cyi += dy;
        out = extract(cxi, cyi);
    }
    return out;
}

PsfGrid resample(const PsfGrid& grid, double target_pitch_um, int target_size) {
    if (target_pitch_um < grid.pitch_um) throw UpsampleNotSupported();
    if (target_pitch_um == grid.pitch_um && target_size == grid.width &&
        target_size == grid.height)
        return grid;

    const double ps = grid.pitch_um;
    const double pt = target_pitch_um;
    // Output footprint centered on the input's physical center; anything
    // outside the input support reads as zero.
    const double x0 = grid.width * ps / 2.0 - target_size * pt / 2.0;
    const double y0 = grid.height * ps / 2.0 - target_size * pt / 2.0;

    PsfGrid out(target_size, target_size, pt);
    for (int oy = 0; oy < target_size; ++oy) {
        const double ylo = y0 + oy * pt, yhi = ylo + pt;
        const int sy0 = std::max(0, static_cast<int>(std::floor(ylo / ps)));
        const int sy1 = std::min(grid.height - 1, static_cast<int>(std::ceil(yhi / ps)) - 1);
        for (int ox = 0; ox < target_size; ++ox) {
            const double xlo = x0 + ox * pt, xhi = xlo + pt;
            const int sx0 = std::max(0, static_cast<int>(std::floor(xlo / ps)));
            const int sx1 = std::min(grid.width - 1, static_cast<int>(std::ceil(xhi / ps)) - 1);
            double acc = 0.0;
            for (int sy = sy0; sy <= sy1; ++sy) {
                const double oh = std::min(yhi, (sy + 1) * ps) - std::max(ylo, sy * ps);
                if (oh <= 0.0) continue;
                for (int sx = sx0; sx <= sx1; ++sx) {
                    const double ow = std::min(xhi, (sx + 1) * ps) - std::max(xlo, sx * ps);
                    if (ow <= 0.0) continue;
                    // Each input pixel's value is mass spread uniformly over
                    // its footprint; collect the fraction inside this output
                    // pixel so total volume is conserved.
                    acc += grid.at(sx, sy) * (ow * oh) / (ps * ps);
                }
            }
            out.at(ox, oy) = acc;
        }
    }
    return out;
}

PsfGrid normalize_volume(const PsfGrid& grid) {
    const double total = grid.sum();
    if (total <= 0.0) throw AllZeroGrid();
    PsfGrid out = grid;
    for (double& v : out.values) v /= total;
    return out;
}

std::vector<double> flatten(const PsfGrid& grid) { return grid.values; }

PsfGrid unflatten(const std::vector<double>& v, int width, int height, double pitch_um) {
    if (v.size() != static_cast<size_t>(width) * height)
        throw DimensionMismatch("unflatten: vector length does not match width*height");
    PsfGrid out(width, height, pitch_um);
    out.values = v;
    return out;
}

}  // namespace psfnet
