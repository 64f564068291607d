#include "inkscore/content.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace inkscore {

namespace {

// Same engine-stable Fisher-Yates as the Hough point order: output depends
// only on the seed and the input, not on the standard library.
template <typename T>
void seeded_shuffle(std::vector<T>& xs, std::mt19937& rng) {
    for (std::size_t i = xs.size(); i > 1; --i) {
        const std::uint32_t bound = static_cast<std::uint32_t>(i);
        const std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
        std::uint32_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(xs[i - 1], xs[r % bound]);
    }
}

} // namespace

bool mentions_hard_to_interpret(const std::string& text) {
    std::string low(text);
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return low.find("hard to interpret") != std::string::npos;
}

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw Error("cosine_distance: dimension mismatch (" +
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    if (a.empty()) throw Error("cosine_distance: empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine_distance: zero vector");
    const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(d, 0.0, 2.0);
}

double dist_from_stim(const EmbeddingVector& drawing, const EmbeddingVector& stimulus) {
    if (drawing.model_id != stimulus.model_id)
        throw Error("dist_from_stim: embedding model mismatch ('" +
                    drawing.model_id + "' vs '" + stimulus.model_id + "')");
    return cosine_distance(drawing.values, stimulus.values);
}

double knn_uniqueness(const std::string& query_id,
                      const std::vector<EmbeddingEntry>& corpus,
                      int k) {
    if (k < 1) throw Error("knn_uniqueness: k must be positive");
    const EmbeddingEntry* query = nullptr;
    for (const EmbeddingEntry& e : corpus)
        if (e.id == query_id) {
            query = &e;
            break;
        }
    if (!query) throw Error("knn_uniqueness: '" + query_id + "' not in corpus");

    std::vector<std::pair<double, const std::string*>> dists;
    dists.reserve(corpus.size());
    for (const EmbeddingEntry& e : corpus) {
        if (e.id == query_id) continue;
        dists.emplace_back(cosine_distance(query->embedding, e.embedding), &e.id);
    }
    if (static_cast<int>(dists.size()) < k)
        throw Error("knn_uniqueness: need at least " + std::to_string(k + 1) +
                    " entries, have " + std::to_string(dists.size() + 1));
    std::sort(dists.begin(), dists.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return *a.second < *b.second;
              });
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += dists[i].first;
    return sum / k;
}

Dendrogram hierarchical_cluster(const std::vector<EmbeddingEntry>& entries) {
    const int n = static_cast<int>(entries.size());
    if (n == 0) throw Error("hierarchical_cluster: no entries");
    Dendrogram dendro;
    dendro.n_leaves = n;
    if (n == 1) return dendro;

    // Working distance matrix over active slots. A merge reuses slot a and
    // retires slot b by swapping in the last active slot.
    std::vector<double> D(static_cast<std::size_t>(n) * n, 0.0);
    auto d = [&](int i, int j) -> double& {
        return D[static_cast<std::size_t>(i) * n + j];
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d(i, j) = d(j, i) =
                cosine_distance(entries[i].embedding, entries[j].embedding);

    std::vector<int> cid(n), csize(n, 1), cmin(n);
    for (int i = 0; i < n; ++i) cid[i] = cmin[i] = i;
    int active = n;

    dendro.merges.reserve(n - 1);
    for (int m = 0; m < n - 1; ++m) {
        int best_a = -1, best_b = -1;
        double best_d = std::numeric_limits<double>::infinity();
        int best_lo = 0, best_hi = 0;
        for (int a = 0; a < active; ++a) {
            for (int b = a + 1; b < active; ++b) {
                const double dist = d(a, b);
                const int lo = std::min(cmin[a], cmin[b]);
                const int hi = std::max(cmin[a], cmin[b]);
                // Ties go to the pair containing the earliest leaves, so the
                // merge order is a pure function of the distances.
                if (dist < best_d ||
                    (dist == best_d &&
                     (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
                    best_d = dist;
                    best_a = a;
                    best_b = b;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        }

        const int a = best_a, b = best_b;
        Merge merge;
        merge.height = best_d;
        merge.size = csize[a] + csize[b];
        if (cmin[a] <= cmin[b]) {
            merge.left = cid[a];
            merge.right = cid[b];
        } else {
            merge.left = cid[b];
            merge.right = cid[a];
        }
        dendro.merges.push_back(merge);

        // Average linkage via Lance-Williams: size-weighted mean of the two
        // old distances.
        for (int k = 0; k < active; ++k) {
            if (k == a || k == b) continue;
            d(a, k) = d(k, a) =
                (csize[a] * d(a, k) + csize[b] * d(b, k)) / merge.size;
        }
        cid[a] = n + m;
        csize[a] = merge.size;
        cmin[a] = std::min(cmin[a], cmin[b]);

        const int last = active - 1;
        if (b != last) {
            cid[b] = cid[last];
            csize[b] = csize[last];
            cmin[b] = cmin[last];
            for (int k = 0; k < active; ++k) {
                if (k == b) continue;
                d(b, k) = d(k, b) = d(last, k);
            }
        }
        --active;
    }
    return dendro;
}

std::vector<int> cut_dendrogram(const Dendrogram& dendro, const CutRule& rule) {
    const int n = dendro.n_leaves;
    if (n == 0) return {};

    int apply = 0;
    if (rule.kind == CutRule::Kind::n_clusters) {
        if (rule.n_clusters < 1)
            throw ValidationError("cut_dendrogram: n_clusters must be positive");
        apply = std::max(0, n - rule.n_clusters);
    } else {
        while (apply < static_cast<int>(dendro.merges.size()) &&
               dendro.merges[apply].height <= rule.distance)
            ++apply;
    }

    // Members per cluster id; leaves first, merged clusters appended.
    std::vector<std::vector<int>> members(n + apply);
    std::vector<bool> consumed(n + apply, false);
    for (int i = 0; i < n; ++i) members[i] = {i};
    for (int m = 0; m < apply; ++m) {
        const Merge& mg = dendro.merges[m];
        auto& dst = members[n + m];
        dst = members[mg.left];
        dst.insert(dst.end(), members[mg.right].begin(), members[mg.right].end());
        consumed[mg.left] = consumed[mg.right] = true;
    }

    std::vector<std::pair<int, int>> roots;  // (smallest member, cluster id)
    for (int id = 0; id < n + apply; ++id) {
        if (consumed[id]) continue;
        roots.emplace_back(*std::min_element(members[id].begin(), members[id].end()), id);
    }
    std::sort(roots.begin(), roots.end());

    std::vector<int> labels(n, -1);
    for (std::size_t c = 0; c < roots.size(); ++c)
        for (int leaf : members[roots[c].second]) labels[leaf] = static_cast<int>(c);
    return labels;
}

ClusterResult cluster_embeddings(const std::vector<EmbeddingEntry>& entries,
                                 const CutRule& cut) {
    ClusterResult result;
    result.dendrogram = hierarchical_cluster(entries);
    result.labels = cut_dendrogram(result.dendrogram, cut);
    return result;
}

std::map<std::string, double> conceptual_diversity(
    const std::vector<CategoryAnnotation>& annotations,
    const std::map<std::string, std::string>& bucket_of) {
    std::set<std::string> universe;
    std::map<std::string, std::set<std::string>> per_bucket;
    for (const CategoryAnnotation& ann : annotations) {
        const auto it = bucket_of.find(ann.drawing_id);
        for (const std::string& c : ann.categories) {
            universe.insert(c);
            if (it != bucket_of.end()) per_bucket[it->second].insert(c);
        }
    }
    if (universe.empty()) throw Error("conceptual_diversity: no categories");
    std::map<std::string, double> out;
    for (const auto& [bucket, cats] : per_bucket)
        out[bucket] = static_cast<double>(cats.size()) /
                      static_cast<double>(universe.size());
    return out;
}

std::vector<FlexibilitySet> build_flexibility_sets(
    const std::vector<DrawingRecord>& records,
    std::uint32_t seed,
    std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    std::map<std::string, const DrawingRecord*> by_id;
    for (const DrawingRecord& r : records) by_id[r.drawing_id] = &r;

    // Per-rater set score = mean of that rater's drawing scores; the
    // headline score averages whichever raters are present.
    auto score_set = [&](FlexibilitySet& set) -> bool {
        double s1 = 0.0, s2 = 0.0;
        int n1 = 0, n2 = 0;
        for (const std::string& id : set.drawing_ids) {
            const DrawingRecord* r = by_id.at(id);
            if (r->flex1) { s1 += *r->flex1; ++n1; }
            if (r->flex2) { s2 += *r->flex2; ++n2; }
        }
        if (n1) set.score1 = s1 / n1;
        if (n2) set.score2 = s2 / n2;
        if (!n1 && !n2) return false;
        double sum = 0.0;
        int cnt = 0;
        if (set.score1) { sum += *set.score1; ++cnt; }
        if (set.score2) { sum += *set.score2; ++cnt; }
        set.score = sum / cnt;
        return true;
    };

    std::vector<FlexibilitySet> out;

    // Humans: one set per participant, needing all three stimuli.
    const Subgroup human_subgroups[] = {Subgroup::pre_schematic,
                                        Subgroup::schematic, Subgroup::adult};
    for (Subgroup sg : human_subgroups) {
        std::map<std::string, std::array<const DrawingRecord*, 3>> per_participant;
        for (const DrawingRecord& r : records) {
            if (r.subgroup != sg) continue;
            auto& slots = per_participant[r.participant];
            auto& slot = slots[static_cast<int>(r.stimulus)];
            if (slot == nullptr) slot = &r;
        }
        for (const auto& [participant, slots] : per_participant) {
            if (!slots[0] || !slots[1] || !slots[2]) {
                warn("flexibility: participant '" + participant +
                     "' lacks a drawing for every stimulus; skipped");
                continue;
            }
            FlexibilitySet set;
            set.set_id = participant;
            set.subgroup = sg;
            set.drawing_ids = {slots[0]->drawing_id, slots[1]->drawing_id,
                               slots[2]->drawing_id};
            if (!score_set(set)) {
                warn("flexibility: set '" + set.set_id +
                     "' has no flexibility ratings; skipped");
                continue;
            }
            out.push_back(std::move(set));
        }
    }

    // AI: pair drawings across the per-stimulus pools at random, each
    // drawing used at most once; one shared engine, prompts and stimuli
    // visited in fixed order, so the pairing is reproducible.
    std::mt19937 rng(seed);
    const Subgroup prompts[] = {Subgroup::prompt1, Subgroup::prompt2,
                                Subgroup::prompt3};
    for (Subgroup sg : prompts) {
        std::array<std::vector<std::string>, 3> pools;
        for (const DrawingRecord& r : records) {
            if (r.subgroup != sg) continue;
            pools[static_cast<int>(r.stimulus)].push_back(r.drawing_id);
        }
        for (auto& pool : pools) {
            std::sort(pool.begin(), pool.end());
            seeded_shuffle(pool, rng);
        }
        const std::size_t n_sets =
            std::min({pools[0].size(), pools[1].size(), pools[2].size()});
        const std::size_t n_max =
            std::max({pools[0].size(), pools[1].size(), pools[2].size()});
        if (n_max == 0) continue;
        if (n_sets != n_max)
            warn("flexibility: uneven stimulus pools for " + to_string(sg) +
                 " (" + std::to_string(pools[0].size()) + "/" +
                 std::to_string(pools[1].size()) + "/" +
                 std::to_string(pools[2].size()) + "); building " +
                 std::to_string(n_sets) + " sets");
        for (std::size_t i = 0; i < n_sets; ++i) {
            FlexibilitySet set;
            set.set_id = to_string(sg) + "#" + std::to_string(i);
            set.subgroup = sg;
            set.drawing_ids = {pools[0][i], pools[1][i], pools[2][i]};
            if (!score_set(set)) {
                warn("flexibility: set '" + set.set_id +
                     "' has no flexibility ratings; skipped");
                continue;
            }
            out.push_back(std::move(set));
        }
    }
    return out;
}

} // namespace inkscore
