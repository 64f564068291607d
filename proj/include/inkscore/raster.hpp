#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "inkscore/errors.hpp"
#include "inkscore/stats.hpp"

namespace inkscore {

/// 8-bit luminance image, row-major.
struct GrayRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayRaster() = default;
    GrayRaster(int w, int h, std::uint8_t fill = 255)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool empty() const { return width <= 0 || height <= 0; }
};

/// 1-bit ink mask, row-major; 1 = ink. The unit of all style computation.
struct BinaryRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> ink;

    BinaryRaster() = default;
    BinaryRaster(int w, int h)
        : width(w), height(h), ink(static_cast<std::size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return ink[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { ink[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t size() const { return ink.size(); }

    std::size_t ink_count() const;
    bool blank() const { return ink_count() == 0; }

    bool operator==(const BinaryRaster&) const = default;
};

/// Inclusive pixel bounding box.
struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    bool contains(int x, int y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    bool operator==(const BoundingBox&) const = default;
};

struct ThresholdMode {
    enum class Kind { otsu, fixed };
    Kind kind = Kind::otsu;
    int value = 128;

    static ThresholdMode otsu() { return {Kind::otsu, 128}; }
    static ThresholdMode fixed(int t) { return {Kind::fixed, t}; }
};

/// Otsu threshold over a 256-bin histogram: first threshold maximizing
/// between-class variance. Returns -1 for a degenerate (single-bin) histogram.
int otsu_threshold(const std::array<std::uint64_t, 256>& histogram);

/// Ink iff luminance < threshold. Otsu falls back to fixed(128) on a
/// degenerate single-intensity image.
BinaryRaster binarize(const GrayRaster& img, ThresholdMode mode = ThresholdMode::otsu());

/// Connected-component labeling. Returns labels (0 = background, components
/// numbered from 1 in scan order of their first pixel) and the component count.
struct ComponentLabels {
    std::vector<std::int32_t> labels;
    int count = 0;
};
ComponentLabels label_components(const BinaryRaster& img, int connectivity = 8);

/// Removes every ink component with area < min_area; larger components are
/// preserved bit-exactly.
BinaryRaster despeckle(const BinaryRaster& img, int min_area);

/// Exact Euclidean distance transform: per pixel, distance to the nearest
/// background pixel. The frame border is treated as background, so the result
/// is finite even for an all-ink image. Background pixels map to 0.
std::vector<double> distance_transform(const BinaryRaster& img);

/// Zhang-Suen-style iterative thinning, with a guard that keeps one pixel of
/// any component the parallel deletion step would otherwise erase completely.
/// Output ink is a subset of input ink; 8-connected component count is
/// preserved.
BinaryRaster skeletonize(const BinaryRaster& img);

/// Mean local stroke width: mean over skeleton pixels of (2*EDT - 1).
/// Throws "no ink" on a blank image.
double estimate_line_thickness(const BinaryRaster& img);

/// One 3x3 full-square dilation.
BinaryRaster dilate3x3(const BinaryRaster& img);

/// Repeated 3x3 dilation until the thickness estimate is within tol of target
/// or exceeds target; capped at max_iters. Blank images pass through
/// unchanged. Throws "cannot thin by dilation" when target < estimate - tol.
BinaryRaster dilate_to_thickness(const BinaryRaster& img, double target, double tol,
                                 int max_iters = 20);

/// Nearest-neighbor resample of the crop box to out_w x out_h.
BinaryRaster crop_and_resize(const BinaryRaster& img, const BoundingBox& crop,
                             int out_w = 400, int out_h = 400);

/// Kruskal-Wallis over per-image thickness estimates, one sample per raster.
KWResult check_thickness_equality(const std::vector<std::vector<BinaryRaster>>& groups);

} // namespace inkscore
