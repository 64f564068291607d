#include "inkscore/style.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace inkscore {

namespace {

struct Point {
    int x;
    int y;
};

// Platform-independent Fisher-Yates so the visiting order depends only on the
// seed, not on the standard library's std::shuffle.
void shuffle_points(std::vector<Point>& pts, std::uint32_t seed) {
    std::mt19937 rng(seed);
    for (std::size_t i = pts.size(); i > 1; --i) {
        const std::uint32_t bound = static_cast<std::uint32_t>(i);
        const std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
        std::uint32_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(pts[i - 1], pts[r % bound]);
    }
}

} // namespace

double Segment::length() const {
    return std::hypot(x1 - x0, y1 - y0);
}

double Segment::angle_deg() const {
    double a = std::atan2(y1 - y0, x1 - x0) * 180.0 / std::numbers::pi;
    if (a < 0.0) a += 180.0;
    if (a >= 180.0) a -= 180.0;
    return a;
}

double ink_density(const BinaryRaster& img) {
    if (img.size() == 0) throw Error("ink_density: empty raster");
    return 100.0 * static_cast<double>(img.ink_count()) /
           static_cast<double>(img.size());
}

BoundingBox stimulus_bbox(const BinaryRaster& stimulus) {
    BoundingBox box;
    bool any = false;
    for (int y = 0; y < stimulus.height; ++y) {
        for (int x = 0; x < stimulus.width; ++x) {
            if (!stimulus.at(x, y)) continue;
            if (!any) {
                box = BoundingBox{x, y, x, y};
                any = true;
            } else {
                box.x_min = std::min(box.x_min, x);
                box.y_min = std::min(box.y_min, y);
                box.x_max = std::max(box.x_max, x);
                box.y_max = std::max(box.y_max, y);
            }
        }
    }
    if (!any) throw Error("stimulus_bbox: empty stimulus");
    return box;
}

double ink_inside_fraction(const BinaryRaster& drawing, const BoundingBox& box) {
    std::uint64_t total = 0;
    std::uint64_t inside = 0;
    for (int y = 0; y < drawing.height; ++y) {
        for (int x = 0; x < drawing.width; ++x) {
            if (!drawing.at(x, y)) continue;
            ++total;
            if (box.contains(x, y)) ++inside;
        }
    }
    if (total == 0) throw Error("ink_inside_fraction: no ink");
    return static_cast<double>(inside) / static_cast<double>(total);
}

int count_components(const BinaryRaster& img, int connectivity) {
    return label_components(img, connectivity).count;
}

std::vector<Segment> detect_line_segments(const BinaryRaster& img,
                                          const HoughParams& params) {
    std::vector<Segment> out;
    if (img.blank()) return out;

    const int w = img.width;
    const int h = img.height;
    const int n_theta =
        std::max(1, static_cast<int>(std::lround(180.0 / params.theta_deg)));
    const double theta_step = params.theta_deg * std::numbers::pi / 180.0;
    const int r_off =
        static_cast<int>(std::ceil(std::hypot(w, h) / params.rho)) + 1;
    const int n_rho = 2 * r_off + 1;

    // cos/sin tables already divided by the rho resolution, so the rho index
    // is a single fused multiply per angle.
    std::vector<double> tcos(n_theta), tsin(n_theta);
    for (int n = 0; n < n_theta; ++n) {
        tcos[n] = std::cos(n * theta_step) / params.rho;
        tsin[n] = std::sin(n * theta_step) / params.rho;
    }

    std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
    auto rho_idx = [&](int x, int y, int n) {
        return static_cast<int>(std::lround(x * tcos[n] + y * tsin[n])) + r_off;
    };

    std::vector<Point> points;
    points.reserve(img.ink_count());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (img.at(x, y)) points.push_back({x, y});
    shuffle_points(points, params.seed);

    // Pixels still available; consumed pixels neither vote nor seed again.
    std::vector<std::uint8_t> mask(img.ink);

    auto masked = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h &&
               mask[static_cast<std::size_t>(y) * w + x] != 0;
    };

    for (const Point& seed : points) {
        if (!masked(seed.x, seed.y)) continue;

        // The seed votes for every angle; the best bin picks the walk
        // direction once it clears the threshold.
        int max_val = 0;
        int max_n = 0;
        for (int n = 0; n < n_theta; ++n) {
            int val = ++acc[static_cast<std::size_t>(n) * n_rho +
                            rho_idx(seed.x, seed.y, n)];
            if (val > max_val) {
                max_val = val;
                max_n = n;
            }
        }
        if (max_val < params.threshold) continue;

        // Walk both ways along the winning direction. Stepping is along the
        // major axis; a one-pixel corridor across the minor axis absorbs the
        // angle quantization. Gaps up to max_gap are bridged.
        const double dir_x = -std::sin(max_n * theta_step);
        const double dir_y = std::cos(max_n * theta_step);
        const bool x_major = std::abs(dir_x) >= std::abs(dir_y);

        Point ends[2] = {seed, seed};
        std::vector<Point> trail;
        trail.push_back(seed);

        for (int k = 0; k < 2; ++k) {
            const double s = k == 0 ? 1.0 : -1.0;
            double sx, sy;
            if (x_major) {
                sx = s * (dir_x > 0 ? 1.0 : -1.0);
                sy = s * dir_y / std::abs(dir_x);
            } else {
                sy = s * (dir_y > 0 ? 1.0 : -1.0);
                sx = s * dir_x / std::abs(dir_y);
            }
            double fx = seed.x;
            double fy = seed.y;
            int gap = 0;
            while (true) {
                fx += sx;
                fy += sy;
                const int xi = static_cast<int>(std::lround(fx));
                const int yi = static_cast<int>(std::lround(fy));
                if (xi < 0 || xi >= w || yi < 0 || yi >= h) break;
                bool found = false;
                for (int off : {0, 1, -1}) {
                    const int cx = x_major ? xi : xi + off;
                    const int cy = x_major ? yi + off : yi;
                    if (!masked(cx, cy)) continue;
                    if (!found) {
                        found = true;
                        ends[k] = {cx, cy};
                        gap = 0;
                    }
                    trail.push_back({cx, cy});
                }
                if (!found && ++gap > static_cast<int>(params.max_gap)) break;
            }
        }

        const double len = std::hypot(ends[1].x - ends[0].x,
                                      ends[1].y - ends[0].y);
        const bool good = len >= params.min_length;

        // Consume the walked pixels either way; only a confirmed segment
        // retracts its pixels' votes.
        for (const Point& p : trail) {
            std::uint8_t& m = mask[static_cast<std::size_t>(p.y) * w + p.x];
            if (!m) continue;
            m = 0;
            if (good)
                for (int n = 0; n < n_theta; ++n)
                    --acc[static_cast<std::size_t>(n) * n_rho +
                          rho_idx(p.x, p.y, n)];
        }

        if (good) {
            Segment seg{static_cast<double>(ends[0].x),
                        static_cast<double>(ends[0].y),
                        static_cast<double>(ends[1].x),
                        static_cast<double>(ends[1].y)};
            if (seg.x1 < seg.x0 || (seg.x1 == seg.x0 && seg.y1 < seg.y0)) {
                std::swap(seg.x0, seg.x1);
                std::swap(seg.y0, seg.y1);
            }
            out.push_back(seg);
        }
    }
    return out;
}

std::vector<Segment> merge_similar_segments(const std::vector<Segment>& segments,
                                            double merge_angle_deg,
                                            double merge_dist) {
    std::vector<std::size_t> order(segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return segments[a].length() > segments[b].length();
    });

    std::vector<Segment> kept;
    for (std::size_t idx : order) {
        const Segment& s = segments[idx];
        const double sa = s.angle_deg();
        const double smx = 0.5 * (s.x0 + s.x1);
        const double smy = 0.5 * (s.y0 + s.y1);
        bool duplicate = false;
        for (const Segment& k : kept) {
            double da = std::abs(sa - k.angle_deg());
            da = std::min(da, 180.0 - da);
            if (da >= merge_angle_deg) continue;
            const double kmx = 0.5 * (k.x0 + k.x1);
            const double kmy = 0.5 * (k.y0 + k.y1);
            if (std::hypot(smx - kmx, smy - kmy) < merge_dist) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(s);
    }
    return kept;
}

int count_lines(const BinaryRaster& img, const HoughParams& params) {
    if (img.blank()) return 0;
    const BinaryRaster skel = skeletonize(img);
    const auto segs = detect_line_segments(skel, params);
    return static_cast<int>(
        merge_similar_segments(segs, params.merge_angle_deg, params.merge_dist)
            .size());
}

} // namespace inkscore
