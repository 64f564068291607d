#pragma once

#include <cstdint>
#include <vector>

#include "inkscore/raster.hpp"

namespace inkscore {

// Axis-aligned rectangle marking where the printed stimulus sits on the page,
// in pixel coordinates of the processed raster.
struct StimulusSpec {
    BoundingBox box;
};

// One detected straight stroke, endpoints in pixel coordinates.
struct Segment {
    double x0 = 0.0, y0 = 0.0;
    double x1 = 0.0, y1 = 0.0;

    double length() const;
    // Orientation in degrees, folded into [0, 180).
    double angle_deg() const;
};

// Knobs for the probabilistic Hough transform. The defaults are what the
// pipeline uses; tests override them freely.
struct HoughParams {
    double rho = 1.0;          // accumulator distance resolution (px)
    double theta_deg = 1.0;    // accumulator angle resolution (degrees)
    int threshold = 50;        // accumulator votes needed before a walk
    double min_length = 30.0;  // discard segments shorter than this
    double max_gap = 5.0;      // allowed break (px) while walking a line
    double merge_angle_deg = 5.0;  // near-duplicate merge: max angle difference
    double merge_dist = 10.0;      // near-duplicate merge: max midpoint distance
    std::uint32_t seed = 0x9e3779b9u;  // point visiting order
};

// Percentage of pixels that are ink, in [0, 100].
double ink_density(const BinaryRaster& img);

// Tight bounding box of the stimulus ink. Throws if the stimulus is blank.
BoundingBox stimulus_bbox(const BinaryRaster& stimulus);

// Fraction of the drawing's ink falling inside `box`. Throws if the drawing
// has no ink at all.
double ink_inside_fraction(const BinaryRaster& drawing, const BoundingBox& box);

int count_components(const BinaryRaster& img, int connectivity = 8);

// Progressive probabilistic Hough transform over the ink pixels of `img`.
// Deterministic for a fixed seed. Call on a skeletonized image for stable
// counts; thick strokes otherwise yield a segment per traversal of the band.
std::vector<Segment> detect_line_segments(const BinaryRaster& img,
                                          const HoughParams& params = {});

// Collapse near-duplicates: segments whose orientations differ by less than
// `merge_angle_deg` and whose midpoints sit within `merge_dist` of each other
// are reported once (the longer one survives).
std::vector<Segment> merge_similar_segments(const std::vector<Segment>& segments,
                                            double merge_angle_deg,
                                            double merge_dist);

// Skeletonize, detect, merge; returns the surviving segment count.
int count_lines(const BinaryRaster& img, const HoughParams& params = {});

} // namespace inkscore
