#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inkscore/errors.hpp"
#include "inkscore/record.hpp"

namespace inkscore {

enum class EmbeddingSource { image, text };

struct EmbeddingVector {
    std::vector<double> values;
    EmbeddingSource source = EmbeddingSource::image;
    std::string model_id;
};

struct EmbeddingEntry {
    std::string id;
    std::vector<double> embedding;
};

struct CaptionRecord {
    std::string drawing_id;
    std::string text;
    bool hard_to_interpret = false;
    bool valid = true;                      // false on provider refusal
    std::optional<bool> validated_correct;  // expert check, where available
};

// Case-insensitive substring test for captions whose author declared the
// drawing unreadable rather than describing content.
bool mentions_hard_to_interpret(const std::string& text);

struct CategoryAnnotation {
    std::string drawing_id;
    std::vector<std::string> categories;  // 1-3, most salient first
};

// Drawings produced by the same participant (or sampled for the same AI
// prompt), scored for how many distinct approaches they span.
struct FlexibilitySet {
    std::string set_id;   // participant, or "<prompt>#<index>" for AI sets
    Subgroup subgroup = Subgroup::pre_schematic;
    std::vector<std::string> drawing_ids;    // one per stimulus, order G, I, R
    std::optional<double> score1;            // first rater, 0..2
    std::optional<double> score2;            // second rater, 0..2
    double score = 0.0;                      // mean over available raters
};

// 1 - cos(a, b), clamped to [0, 2]. Throws on dimension mismatch or a
// zero-magnitude input.
double cosine_distance(const std::vector<double>& a, const std::vector<double>& b);

// Cosine distance between a drawing's embedding and the embedding of the
// stimulus it was drawn over. Both must come from the same model; distances
// across embedding spaces mean nothing.
double dist_from_stim(const EmbeddingVector& drawing, const EmbeddingVector& stimulus);

// Mean cosine distance from the entry `query_id` to its k nearest other
// entries. Neighbour ties at the cut are broken by ascending id. Requires at
// least k entries besides the query.
double knn_uniqueness(const std::string& query_id,
                      const std::vector<EmbeddingEntry>& corpus,
                      int k = 10);

// --- agglomerative clustering (average linkage, cosine distance) ----------

struct Merge {
    int left = 0;    // cluster ids; leaves are 0..n-1, merge m creates n+m
    int right = 0;
    double height = 0.0;
    int size = 0;    // leaves under the new cluster
};

struct Dendrogram {
    int n_leaves = 0;
    std::vector<Merge> merges;
};

struct CutRule {
    enum class Kind { n_clusters, distance } kind = Kind::n_clusters;
    int n_clusters = 1;
    double distance = 0.0;

    static CutRule by_count(int n) { return {Kind::n_clusters, n, 0.0}; }
    static CutRule by_distance(double d) { return {Kind::distance, 1, d}; }
};

Dendrogram hierarchical_cluster(const std::vector<EmbeddingEntry>& entries);

// Flat labels after cutting. Clusters are numbered 0,1,... by their smallest
// member index.
std::vector<int> cut_dendrogram(const Dendrogram& dendro, const CutRule& rule);

struct ClusterResult {
    std::vector<int> labels;
    Dendrogram dendrogram;
};

ClusterResult cluster_embeddings(const std::vector<EmbeddingEntry>& entries,
                                 const CutRule& cut);

// Per bucket: |categories seen in bucket| / |categories seen anywhere|.
// `bucket_of` maps drawing_id to its bucket (subgroup, group, ...); drawings
// without a bucket still widen the denominator.
std::map<std::string, double> conceptual_diversity(
    const std::vector<CategoryAnnotation>& annotations,
    const std::map<std::string, std::string>& bucket_of);

// Group drawings into flexibility sets: one per human participant who drew
// all three stimuli, and one per matched random triple within each AI
// prompt (each drawing used at most once). Warnings (skipped participants,
// uneven pools) are appended to `warnings` when given.
std::vector<FlexibilitySet> build_flexibility_sets(
    const std::vector<DrawingRecord>& records,
    std::uint32_t seed,
    std::vector<std::string>* warnings = nullptr);

} // namespace inkscore
