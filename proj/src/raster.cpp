#include "inkscore/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace inkscore {

namespace {

// Row-major offsets for 4- and 8-connectivity.
const int kDx8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
const int kDy8[8] = {0, 0, 1, -1, 1, -1, 1, -1};

struct DisjointSet {
    std::vector<std::int32_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[b] = a; else parent[a] = b;
    }
};

// 1D squared distance transform over finite inputs (lower envelope of
// parabolas, Felzenszwalb-Huttenlocher).
void edt_parabola(const std::vector<double>& f, std::vector<double>& d, int n) {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<int> v(n);
    std::vector<double> z(static_cast<std::size_t>(n) + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) -
                    (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) -
                 (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Number of ink neighbors and 0->1 transitions around (x, y), Zhang-Suen order
// p2..p9 = N, NE, E, SE, S, SW, W, NW.
void neighborhood(const BinaryRaster& img, int x, int y, int p[8]) {
    auto val = [&](int px, int py) -> int {
        return img.in_bounds(px, py) && img.at(px, py) ? 1 : 0;
    };
    p[0] = val(x, y - 1);
    p[1] = val(x + 1, y - 1);
    p[2] = val(x + 1, y);
    p[3] = val(x + 1, y + 1);
    p[4] = val(x, y + 1);
    p[5] = val(x - 1, y + 1);
    p[6] = val(x - 1, y);
    p[7] = val(x - 1, y - 1);
}

// One Zhang-Suen subiteration: marks deletable pixels. subfield 0 uses the
// (p2*p4*p6, p4*p6*p8) conditions, subfield 1 the (p2*p4*p8, p2*p6*p8) ones.
std::vector<std::uint32_t> zs_marks(const BinaryRaster& img, int subfield) {
    std::vector<std::uint32_t> marks;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!img.at(x, y)) continue;
            int p[8];
            neighborhood(img, x, y, p);
            int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
            if (b < 2 || b > 6) continue;
            int a = 0;
            for (int i = 0; i < 8; ++i)
                if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
            if (a != 1) continue;
            int c1, c2;
            if (subfield == 0) {
                c1 = p[0] * p[2] * p[4];
                c2 = p[2] * p[4] * p[6];
            } else {
                c1 = p[0] * p[2] * p[6];
                c2 = p[0] * p[4] * p[6];
            }
            if (c1 != 0 || c2 != 0) continue;
            marks.push_back(static_cast<std::uint32_t>(y) * img.width + x);
        }
    }
    return marks;
}

} // namespace

std::size_t BinaryRaster::ink_count() const {
    return static_cast<std::size_t>(std::count(ink.begin(), ink.end(), std::uint8_t{1}));
}

int otsu_threshold(const std::array<std::uint64_t, 256>& histogram) {
    std::uint64_t total = 0;
    double sum_all = 0.0;
    int distinct = 0;
    for (int i = 0; i < 256; ++i) {
        if (histogram[i] > 0) ++distinct;
        total += histogram[i];
        sum_all += static_cast<double>(i) * histogram[i];
    }
    if (total == 0 || distinct < 2) return -1;

    // Threshold t assigns {v < t} to the ink class; sweep all 255 cuts.
    double best_var = -1.0;
    int best_t = -1;
    std::uint64_t w0 = 0;
    double sum0 = 0.0;
    for (int t = 1; t <= 255; ++t) {
        w0 += histogram[t - 1];
        sum0 += static_cast<double>(t - 1) * histogram[t - 1];
        std::uint64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        double mu0 = sum0 / w0;
        double mu1 = (sum_all - sum0) / w1;
        double between = static_cast<double>(w0) * static_cast<double>(w1) *
                         (mu0 - mu1) * (mu0 - mu1);
        if (between > best_var) {
            best_var = between;
            best_t = t;
        }
    }
    return best_t;
}

BinaryRaster binarize(const GrayRaster& img, ThresholdMode mode) {
    if (img.empty()) throw Error("binarize: empty image");
    int threshold;
    if (mode.kind == ThresholdMode::Kind::fixed) {
        threshold = mode.value;
    } else {
        std::array<std::uint64_t, 256> hist{};
        for (std::uint8_t v : img.pixels) ++hist[v];
        threshold = otsu_threshold(hist);
        if (threshold < 0) threshold = 128; // degenerate histogram
    }
    BinaryRaster out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.ink[i] = img.pixels[i] < threshold ? 1 : 0;
    return out;
}

ComponentLabels label_components(const BinaryRaster& img, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw Error("label_components: connectivity must be 4 or 8");
    std::size_t n = img.size();
    ComponentLabels out;
    out.labels.assign(n, 0);
    if (n == 0) return out;

    // Union-find over ink pixels; second pass renumbers roots in scan order.
    DisjointSet ds(n);
    int ndirs = connectivity == 4 ? 2 : 4;
    // backward neighbors only: W, N (+ NW, NE for 8-connectivity)
    const int bdx[4] = {-1, 0, -1, 1};
    const int bdy[4] = {0, -1, -1, -1};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!img.at(x, y)) continue;
            std::int32_t idx = y * img.width + x;
            for (int d = 0; d < ndirs; ++d) {
                int nx = x + bdx[d], ny = y + bdy[d];
                if (img.in_bounds(nx, ny) && img.at(nx, ny))
                    ds.unite(idx, ny * img.width + nx);
            }
        }
    }
    std::int32_t next = 0;
    std::vector<std::int32_t> root_label(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!img.ink[i]) continue;
        std::int32_t root = ds.find(static_cast<std::int32_t>(i));
        if (root_label[root] == 0) root_label[root] = ++next;
        out.labels[i] = root_label[root];
    }
    out.count = next;
    return out;
}

BinaryRaster despeckle(const BinaryRaster& img, int min_area) {
    if (min_area < 1) throw Error("despeckle: min_area must be >= 1");
    auto comps = label_components(img, 8);
    std::vector<std::int64_t> area(static_cast<std::size_t>(comps.count) + 1, 0);
    for (std::int32_t label : comps.labels)
        if (label > 0) ++area[label];
    BinaryRaster out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i)
        out.ink[i] = (comps.labels[i] > 0 && area[comps.labels[i]] >= min_area) ? 1 : 0;
    return out;
}

std::vector<double> distance_transform(const BinaryRaster& img) {
    int w = img.width + 2, h = img.height + 2; // background frame

    // Column pass: vertical distance to the nearest background pixel. The
    // frame rows make this finite in every column.
    std::vector<double> col(static_cast<std::size_t>(w) * h);
    for (int x = 0; x < w; ++x) {
        double cur = static_cast<double>(w + h);
        for (int y = 0; y < h; ++y) {
            bool bg = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !img.at(x - 1, y - 1);
            cur = bg ? 0.0 : cur + 1.0;
            col[static_cast<std::size_t>(y) * w + x] = cur;
        }
        cur = static_cast<double>(w + h);
        for (int y = h - 1; y >= 0; --y) {
            auto& c = col[static_cast<std::size_t>(y) * w + x];
            cur = c == 0.0 ? 0.0 : cur + 1.0;
            c = std::min(c, cur);
        }
    }

    // Row pass over squared column distances.
    std::vector<double> f(w), d(w);
    std::vector<double> out(img.size());
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 0; x < w; ++x) {
            double c = col[static_cast<std::size_t>(y) * w + x];
            f[x] = c * c;
        }
        edt_parabola(f, d, w);
        for (int x = 1; x < w - 1; ++x)
            out[static_cast<std::size_t>(y - 1) * img.width + (x - 1)] = std::sqrt(d[x]);
    }
    return out;
}

BinaryRaster skeletonize(const BinaryRaster& img) {
    BinaryRaster cur = img;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int subfield = 0; subfield < 2; ++subfield) {
            auto marks = zs_marks(cur, subfield);
            if (marks.empty()) continue;

            // Keep one pixel of any component the parallel deletion would erase.
            auto comps = label_components(cur, 8);
            std::vector<std::int64_t> area(static_cast<std::size_t>(comps.count) + 1, 0);
            std::vector<std::int64_t> marked(static_cast<std::size_t>(comps.count) + 1, 0);
            for (std::size_t i = 0; i < cur.size(); ++i)
                if (comps.labels[i] > 0) ++area[comps.labels[i]];
            for (std::uint32_t m : marks) ++marked[comps.labels[m]];
            std::vector<std::uint8_t> spared(static_cast<std::size_t>(comps.count) + 1, 0);
            for (std::uint32_t m : marks) {
                std::int32_t label = comps.labels[m];
                if (marked[label] == area[label] && !spared[label]) {
                    spared[label] = 1; // marks are in scan order; spare the first
                    continue;
                }
                cur.ink[m] = 0;
                changed = true;
            }
        }
    }
    return cur;
}

double estimate_line_thickness(const BinaryRaster& img) {
    if (img.blank()) throw Error("no ink");
    BinaryRaster skel = skeletonize(img);
    auto dist = distance_transform(img);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < skel.size(); ++i) {
        if (!skel.ink[i]) continue;
        sum += 2.0 * dist[i] - 1.0;
        ++count;
    }
    return sum / static_cast<double>(count);
}

BinaryRaster dilate3x3(const BinaryRaster& img) {
    BinaryRaster out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!img.at(x, y)) continue;
            std::size_t idx = static_cast<std::size_t>(y) * img.width + x;
            out.ink[idx] = 1;
            for (int d = 0; d < 8; ++d) {
                int nx = x + kDx8[d], ny = y + kDy8[d];
                if (img.in_bounds(nx, ny))
                    out.ink[static_cast<std::size_t>(ny) * img.width + nx] = 1;
            }
        }
    }
    return out;
}

BinaryRaster dilate_to_thickness(const BinaryRaster& img, double target, double tol,
                                 int max_iters) {
    if (img.blank()) return img; // nothing to dilate
    double estimate = estimate_line_thickness(img);
    if (target < estimate - tol) throw Error("cannot thin by dilation");
    BinaryRaster cur = img;
    for (int iter = 0; iter < max_iters; ++iter) {
        if (std::fabs(estimate - target) <= tol || estimate > target) break;
        cur = dilate3x3(cur);
        estimate = estimate_line_thickness(cur);
    }
    return cur;
}

BinaryRaster crop_and_resize(const BinaryRaster& img, const BoundingBox& crop,
                             int out_w, int out_h) {
    if (crop.x_min > crop.x_max || crop.y_min > crop.y_max)
        throw Error("crop_and_resize: empty crop");
    if (crop.x_min < 0 || crop.y_min < 0 || crop.x_max >= img.width || crop.y_max >= img.height)
        throw Error("crop_and_resize: crop outside image");
    if (out_w <= 0 || out_h <= 0) throw Error("crop_and_resize: invalid output size");

    int cw = crop.width(), ch = crop.height();
    BinaryRaster out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        int sy = crop.y_min + std::min(ch - 1, static_cast<int>((y + 0.5) * ch / out_h));
        for (int x = 0; x < out_w; ++x) {
            int sx = crop.x_min + std::min(cw - 1, static_cast<int>((x + 0.5) * cw / out_w));
            out.set(x, y, img.at(sx, sy));
        }
    }
    return out;
}

KWResult check_thickness_equality(const std::vector<std::vector<BinaryRaster>>& groups) {
    if (groups.size() < 2) throw Error("check_thickness_equality: need >= 2 groups");
    std::vector<std::vector<double>> thickness(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw Error("check_thickness_equality: empty group");
        for (const auto& img : groups[g])
            thickness[g].push_back(estimate_line_thickness(img));
    }
    return kruskal_wallis(thickness);
}

} // namespace inkscore
