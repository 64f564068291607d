#include "inkscore/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "inkscore/cache.hpp"
#include "inkscore/content.hpp"
#include "inkscore/csv.hpp"
#include "inkscore/manifest.hpp"
#include "inkscore/png_io.hpp"
#include "inkscore/providers.hpp"
#include "inkscore/raster.hpp"
#include "inkscore/style.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace inkscore {

namespace {

constexpr const char* kPipelineVersion = "1.0.0";

unsigned worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 4;
    hw = std::min(hw, 8u);
    if (jobs < hw) hw = static_cast<unsigned>(std::max<std::size_t>(jobs, 1));
    return hw;
}

// Jobs stride across a fixed pool (job i on worker i % n) and write into
// index-addressed slots, so scheduling never shows in the outputs.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&fn, w, workers, n] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

BinaryRaster preprocess_image(const GrayRaster& gray, const PreprocessConfig& pc) {
    const ThresholdMode mode = pc.fixed_threshold
                                   ? ThresholdMode::fixed(*pc.fixed_threshold)
                                   : ThresholdMode::otsu();
    BinaryRaster bin = binarize(gray, mode);
    bin = despeckle(bin, pc.min_speck_area);
    const BoundingBox full{0, 0, bin.width - 1, bin.height - 1};
    return crop_and_resize(bin, full, pc.out_size, pc.out_size);
}

void fail_if_excessive(const std::vector<DrawingFailure>& failures, std::size_t total,
                       const char* stage) {
    if (failures.empty() || total == 0) return;
    if (static_cast<double>(failures.size()) <= 0.01 * static_cast<double>(total))
        return;
    std::ostringstream msg;
    msg << stage << ": " << failures.size() << " of " << total
        << " drawings failed (more than 1%):";
    const std::size_t shown = std::min<std::size_t>(failures.size(), 5);
    for (std::size_t i = 0; i < shown; ++i)
        msg << "\n  " << failures[i].drawing_id << ": " << failures[i].error;
    if (failures.size() > shown) msg << "\n  ... and " << failures.size() - shown << " more";
    throw ValidationError(msg.str());
}

ordered_json failures_json(const std::vector<DrawingFailure>& failures) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : failures)
        arr.push_back(ordered_json{{"drawing_id", f.drawing_id}, {"error", f.error}});
    return arr;
}

void write_json(const std::string& path, const ordered_json& j) {
    write_file(path, j.dump(2) + "\n");
}

std::vector<unsigned char> to_bytes(const std::string& s) {
    return std::vector<unsigned char>(s.begin(), s.end());
}

} // namespace

std::string processed_dir(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "processed").string();
}
std::string processed_image_path(const RunConfig& cfg, const std::string& drawing_id) {
    return (fs::path(processed_dir(cfg)) / (drawing_id + ".png")).string();
}
std::string processed_stimulus_path(const RunConfig& cfg, Stimulus s) {
    return (fs::path(processed_dir(cfg)) / ("stimulus_" + to_string(s) + ".png")).string();
}
std::string metrics_csv_path(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "metrics.csv").string();
}
std::string embeddings_path(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "embeddings.jsonl").string();
}
std::string run_meta_path(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "run_meta.json").string();
}
std::string preprocess_meta_path(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "preprocess_meta.json").string();
}
std::string report_json_path(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "report.json").string();
}
std::string report_text_path(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "report.txt").string();
}
std::string figures_dir(const RunConfig& cfg) {
    return (fs::path(cfg.out_dir) / "figures").string();
}

const std::set<std::string>& metrics_text_columns() {
    static const std::set<std::string> cols = {"drawing_id", "group",    "subgroup",
                                               "participant", "stimulus", "caption",
                                               "categories"};
    return cols;
}

MetricsTable load_metrics(const RunConfig& cfg) {
    return MetricsTable::load_csv(metrics_csv_path(cfg), metrics_text_columns());
}

std::vector<StoredEmbedding> load_embeddings(const RunConfig& cfg) {
    const std::string content = read_file(embeddings_path(cfg));
    std::vector<StoredEmbedding> out;
    std::size_t line_no = 0;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("embeddings.jsonl line " + std::to_string(line_no) +
                                  ": " + e.what());
        }
        StoredEmbedding e;
        e.kind = j.at("kind").get<std::string>();
        e.id = j.at("id").get<std::string>();
        e.model_id = j.at("model_id").get<std::string>();
        e.values = j.at("values").get<std::vector<double>>();
        out.push_back(std::move(e));
    }
    return out;
}

PreprocessOutcome run_preprocess(const RunConfig& cfg) {
    PreprocessOutcome out;
    const std::vector<DrawingRecord> records = ingest_manifest(cfg.manifest);
    out.n_records = records.size();
    fs::create_directories(processed_dir(cfg));

    // Stimulus sheets get the exact same treatment as the drawings so that
    // boxes and embedding distances live in one pixel/feature space.
    for (const auto& [stim, path] : cfg.stimuli) {
        try {
            const GrayRaster gray = load_gray_png(path);
            write_binary_png(preprocess_image(gray, cfg.preprocess),
                             processed_stimulus_path(cfg, stim));
        } catch (const std::exception& e) {
            throw ValidationError("preprocess: stimulus " + to_string(stim) + " (" +
                                  path + "): " + e.what());
        }
    }

    std::vector<std::optional<BinaryRaster>> rasters(records.size());
    std::vector<std::optional<DrawingFailure>> slot_fail(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        try {
            const GrayRaster gray = load_gray_png(records[i].image_path);
            rasters[i] = preprocess_image(gray, cfg.preprocess);
        } catch (const std::exception& e) {
            slot_fail[i] = DrawingFailure{records[i].drawing_id, e.what()};
        }
    });

    // Stroke-width alignment: children and AI drawings are dilated toward the
    // mean adult thickness. Strokes already at or above the target stay as
    // drawn (dilation cannot thin), and blank pages are left alone.
    std::vector<std::optional<double>> thickness(records.size());
    auto measure_all = [&] {
        parallel_for(records.size(), [&](std::size_t i) {
            thickness[i].reset();
            if (rasters[i] && !rasters[i]->blank())
                thickness[i] = estimate_line_thickness(*rasters[i]);
        });
    };
    measure_all();

    std::vector<double> adult_thickness;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].group == Group::adult && thickness[i])
            adult_thickness.push_back(*thickness[i]);

    if (!adult_thickness.empty()) {
        const double target =
            std::accumulate(adult_thickness.begin(), adult_thickness.end(), 0.0) /
            static_cast<double>(adult_thickness.size());
        out.adult_mean_thickness = target;
        if (cfg.preprocess.match_thickness) {
            std::atomic<std::size_t> dilated{0};
            parallel_for(records.size(), [&](std::size_t i) {
                if (records[i].group == Group::adult || !thickness[i]) return;
                if (*thickness[i] + cfg.preprocess.thickness_tol >= target) return;
                try {
                    rasters[i] = dilate_to_thickness(*rasters[i], target,
                                                     cfg.preprocess.thickness_tol);
                    ++dilated;
                } catch (const std::exception& e) {
                    slot_fail[i] = DrawingFailure{records[i].drawing_id, e.what()};
                    rasters[i].reset();
                    thickness[i].reset();
                }
            });
            out.n_dilated = dilated.load();
            if (out.n_dilated > 0) measure_all();
        }
    } else if (cfg.preprocess.match_thickness) {
        out.warnings.push_back(
            "preprocess: thickness matching skipped: no inked adult drawings");
    }

    // Post-alignment check that the cohorts are comparable.
    std::vector<std::vector<double>> kw_groups(3);
    for (std::size_t i = 0; i < records.size(); ++i)
        if (thickness[i])
            kw_groups[static_cast<std::size_t>(records[i].group)].push_back(*thickness[i]);
    std::vector<std::vector<double>> kw_nonempty;
    for (auto& g : kw_groups)
        if (!g.empty()) kw_nonempty.push_back(std::move(g));
    if (kw_nonempty.size() >= 2) {
        out.thickness_kw = kruskal_wallis(kw_nonempty);
    } else {
        out.warnings.push_back(
            "preprocess: thickness check skipped: fewer than two groups with ink");
    }

    parallel_for(records.size(), [&](std::size_t i) {
        if (!rasters[i] || slot_fail[i]) return;
        try {
            write_binary_png(*rasters[i], processed_image_path(cfg, records[i].drawing_id));
        } catch (const std::exception& e) {
            slot_fail[i] = DrawingFailure{records[i].drawing_id, e.what()};
        }
    });
    for (auto& f : slot_fail)
        if (f) out.failures.push_back(std::move(*f));
    out.n_processed = records.size() - out.failures.size();

    ordered_json thickness_meta{
        {"match_thickness", cfg.preprocess.match_thickness},
        {"adult_mean", out.adult_mean_thickness ? ordered_json(*out.adult_mean_thickness)
                                                : ordered_json(nullptr)},
        {"n_dilated", out.n_dilated}};
    if (out.thickness_kw) {
        thickness_meta["kruskal_wallis"] =
            ordered_json{{"H", out.thickness_kw->H},
                         {"df", out.thickness_kw->df},
                         {"p", out.thickness_kw->p},
                         {"group_ns", out.thickness_kw->group_ns}};
    } else {
        thickness_meta["kruskal_wallis"] = nullptr;
    }
    write_json(preprocess_meta_path(cfg),
               ordered_json{{"version", kPipelineVersion},
                            {"n_records", out.n_records},
                            {"n_processed", out.n_processed},
                            {"thickness", thickness_meta},
                            {"failures", failures_json(out.failures)},
                            {"warnings", out.warnings}});

    fail_if_excessive(out.failures, records.size(), "preprocess");
    return out;
}

MetricsOutcome run_metrics(const RunConfig& cfg) {
    MetricsOutcome out;
    const std::vector<DrawingRecord> records = ingest_manifest(cfg.manifest);
    const std::size_t n = records.size();
    out.n_records = n;

    // Processed artifacts from the preprocess stage.
    std::vector<std::vector<unsigned char>> png_bytes(n);
    std::vector<std::optional<BinaryRaster>> rasters(n);
    std::vector<std::optional<DrawingFailure>> slot_fail(n);
    parallel_for(n, [&](std::size_t i) {
        const std::string path = processed_image_path(cfg, records[i].drawing_id);
        try {
            png_bytes[i] = to_bytes(read_file(path));
            const GrayRaster gray = decode_gray_png(png_bytes[i]);
            rasters[i] = binarize(gray, ThresholdMode::fixed(128));
        } catch (const std::exception& e) {
            png_bytes[i].clear();
            slot_fail[i] = DrawingFailure{
                records[i].drawing_id,
                std::string("processed image unavailable (did preprocess run?): ") +
                    e.what()};
        }
    });

    std::map<Stimulus, BoundingBox> stim_box;
    std::map<Stimulus, std::vector<unsigned char>> stim_bytes;
    for (const auto& [stim, unused_path] : cfg.stimuli) {
        const std::string path = processed_stimulus_path(cfg, stim);
        try {
            std::vector<unsigned char> bytes = to_bytes(read_file(path));
            const BinaryRaster raster = binarize(decode_gray_png(bytes),
                                                 ThresholdMode::fixed(128));
            stim_box[stim] = stimulus_bbox(raster);
            stim_bytes[stim] = std::move(bytes);
        } catch (const std::exception& e) {
            throw ValidationError("metrics: processed stimulus " + to_string(stim) +
                                  " unavailable (did preprocess run?): " + e.what());
        }
    }

    // Style metrics, one slot per drawing; a blank page legitimately yields
    // density 0 and no inside-fraction rather than an error.
    struct StyleSlots {
        std::optional<double> density;
        std::optional<double> inside;
        std::optional<double> components;
        std::optional<double> lines;
    };
    std::vector<StyleSlots> style(n);
    parallel_for(n, [&](std::size_t i) {
        if (!rasters[i]) return;
        try {
            const BinaryRaster& img = *rasters[i];
            style[i].density = ink_density(img);
            style[i].components = count_components(img);
            style[i].lines = count_lines(img, cfg.hough);
            auto box = stim_box.find(records[i].stimulus);
            if (box != stim_box.end() && !img.blank())
                style[i].inside = ink_inside_fraction(img, box->second);
        } catch (const std::exception& e) {
            slot_fail[i] = DrawingFailure{records[i].drawing_id,
                                          std::string("style metrics: ") + e.what()};
        }
    });
    if (!cfg.stimuli.empty()) {
        for (const auto& r : records) {
            if (!stim_box.count(r.stimulus)) {
                out.warnings.push_back("metrics: no stimulus image configured for " +
                                       to_string(r.stimulus) +
                                       "; ink_inside_fraction and dist_from_stim are "
                                       "missing for its drawings");
                break;
            }
        }
    } else {
        out.warnings.push_back(
            "metrics: no stimulus images configured; ink_inside_fraction and "
            "dist_from_stim are missing");
    }

    ProviderCache cache((fs::path(cfg.cache_dir)));

    // Image embeddings of the processed PNG bytes (drawings and stimuli).
    const bool image_provider = !cfg.image_embedding.model_id.empty();
    std::vector<std::optional<EmbeddingVector>> image_emb(n);
    std::map<Stimulus, EmbeddingVector> stim_emb;
    std::size_t n_image_emb = 0;
    if (image_provider) {
        std::vector<std::size_t> rows;
        std::vector<std::vector<unsigned char>> inputs;
        for (std::size_t i = 0; i < n; ++i) {
            if (!png_bytes[i].empty()) {
                rows.push_back(i);
                inputs.push_back(png_bytes[i]);
            }
        }
        std::vector<EmbeddingVector> vecs =
            embed_images(inputs, cfg.image_embedding, cache, cfg.offline, &out.warnings);
        for (std::size_t k = 0; k < rows.size(); ++k)
            image_emb[rows[k]] = std::move(vecs[k]);
        n_image_emb = rows.size();

        std::vector<Stimulus> stim_order;
        std::vector<std::vector<unsigned char>> stim_inputs;
        for (const auto& [stim, bytes] : stim_bytes) {
            stim_order.push_back(stim);
            stim_inputs.push_back(bytes);
        }
        if (!stim_inputs.empty()) {
            std::vector<EmbeddingVector> vecs2 = embed_images(
                stim_inputs, cfg.image_embedding, cache, cfg.offline, &out.warnings);
            for (std::size_t k = 0; k < stim_order.size(); ++k)
                stim_emb[stim_order[k]] = std::move(vecs2[k]);
        }
    } else {
        out.warnings.push_back(
            "metrics: no image embedding provider configured; image-embedding "
            "columns are missing");
    }

    // Captions: the manifest's annotation wins; otherwise ask the caption
    // provider; otherwise the column stays missing.
    const bool caption_provider = !cfg.caption.model_id.empty();
    std::vector<std::optional<CaptionRecord>> captions(n);
    std::size_t caps_manifest = 0, caps_provider = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i].caption.empty()) continue;
        CaptionRecord rec;
        rec.drawing_id = records[i].drawing_id;
        rec.text = records[i].caption;
        rec.valid = true;
        rec.hard_to_interpret = mentions_hard_to_interpret(rec.text);
        captions[i] = std::move(rec);
        ++caps_manifest;
    }
    if (caption_provider) {
        std::vector<std::size_t> rows;
        std::vector<std::string> ids;
        std::vector<std::vector<unsigned char>> inputs;
        for (std::size_t i = 0; i < n; ++i) {
            if (captions[i] || png_bytes[i].empty()) continue;
            rows.push_back(i);
            ids.push_back(records[i].drawing_id);
            inputs.push_back(png_bytes[i]);
        }
        if (!rows.empty()) {
            std::vector<CaptionRecord> recs = caption_images(
                ids, inputs, cfg.caption, cache, cfg.offline, &out.warnings);
            for (std::size_t k = 0; k < rows.size(); ++k)
                captions[rows[k]] = std::move(recs[k]);
            caps_provider = rows.size();
        }
    }
    std::size_t caps_missing = 0;
    for (const auto& c : captions)
        if (!c || !c->valid) ++caps_missing;
    if (!caption_provider && caps_manifest < n)
        out.warnings.push_back(
            "metrics: no caption provider configured; drawings without manifest "
            "captions have no caption-derived columns");

    // Text embeddings of the usable captions.
    const bool text_provider = !cfg.text_embedding.model_id.empty();
    std::vector<std::optional<EmbeddingVector>> text_emb(n);
    std::size_t n_text_emb = 0;
    if (text_provider) {
        std::vector<std::size_t> rows;
        std::vector<std::string> inputs;
        for (std::size_t i = 0; i < n; ++i) {
            if (captions[i] && captions[i]->valid && !captions[i]->text.empty()) {
                rows.push_back(i);
                inputs.push_back(captions[i]->text);
            }
        }
        if (!rows.empty()) {
            std::vector<EmbeddingVector> vecs = embed_texts(
                inputs, cfg.text_embedding, cache, cfg.offline, &out.warnings);
            for (std::size_t k = 0; k < rows.size(); ++k)
                text_emb[rows[k]] = std::move(vecs[k]);
            n_text_emb = rows.size();
        }
    } else if (caps_manifest + caps_provider > 0) {
        out.warnings.push_back(
            "metrics: no text embedding provider configured; 10NN_text is missing");
    }

    // Neighbourhood uniqueness within each embedding space.
    auto knn_column = [&](const std::vector<std::optional<EmbeddingVector>>& emb,
                          const char* label) {
        std::vector<std::optional<double>> col(n);
        std::vector<EmbeddingEntry> corpus;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (!emb[i]) continue;
            corpus.push_back(EmbeddingEntry{records[i].drawing_id, emb[i]->values});
            rows.push_back(i);
        }
        if (corpus.empty()) return col;
        if (corpus.size() <= static_cast<std::size_t>(cfg.analysis.knn_k)) {
            out.warnings.push_back(std::string("metrics: fewer than k+1 ") + label +
                                   " embeddings; nearest-neighbour column is missing");
            return col;
        }
        std::vector<std::optional<std::string>> errs(rows.size());
        parallel_for(rows.size(), [&](std::size_t k) {
            try {
                col[rows[k]] = knn_uniqueness(corpus[k].id, corpus, cfg.analysis.knn_k);
            } catch (const std::exception& e) {
                errs[k] = e.what();
            }
        });
        for (std::size_t k = 0; k < rows.size(); ++k)
            if (errs[k])
                out.warnings.push_back(std::string("metrics: ") + label +
                                       " neighbourhood for '" + corpus[k].id +
                                       "': " + *errs[k]);
        return col;
    };
    const auto knn_image = knn_column(image_emb, "image");
    const auto knn_text = knn_column(text_emb, "caption");

    std::vector<std::optional<double>> stim_dist(n);
    std::vector<std::optional<std::string>> stim_dist_err(n);
    parallel_for(n, [&](std::size_t i) {
        if (!image_emb[i]) return;
        auto it = stim_emb.find(records[i].stimulus);
        if (it == stim_emb.end()) return;
        try {
            stim_dist[i] = dist_from_stim(*image_emb[i], it->second);
        } catch (const std::exception& e) {
            stim_dist_err[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        if (stim_dist_err[i])
            out.warnings.push_back("metrics: dist_from_stim for '" +
                                   records[i].drawing_id + "': " + *stim_dist_err[i]);

    // Score columns: raw rater means, plus the expert mean rescaled to [0,1]
    // over its observed range.
    std::vector<std::optional<double>> expert_raw(n), automated(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        if (r.expert1 && r.expert2)
            expert_raw[i] = (*r.expert1 + *r.expert2) / 2.0;
        else if (r.expert1)
            expert_raw[i] = *r.expert1;
        else if (r.expert2)
            expert_raw[i] = *r.expert2;
        if (r.audra && r.osc)
            automated[i] = (*r.audra + *r.osc) / 2.0;
        else if (r.audra)
            automated[i] = *r.audra;
        else if (r.osc)
            automated[i] = *r.osc;
    }
    std::vector<std::optional<double>> expert(n);
    {
        std::vector<double> present;
        for (const auto& v : expert_raw)
            if (v) present.push_back(*v);
        if (!present.empty()) {
            try {
                const std::vector<double> scaled = min_max_normalize(present);
                std::size_t k = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (expert_raw[i]) expert[i] = scaled[k++];
            } catch (const std::exception& e) {
                out.warnings.push_back(std::string("metrics: expert score "
                                                   "normalization skipped: ") +
                                       e.what());
            }
        }
    }

    // Assemble the table; rows follow manifest order, missing stays missing.
    MetricsTable table;
    table.add_column("drawing_id", ColumnType::text);
    table.add_column("group", ColumnType::text);
    table.add_column("subgroup", ColumnType::text);
    table.add_column("participant", ColumnType::text);
    table.add_column("stimulus", ColumnType::text);
    table.add_column("inverted", ColumnType::numeric);
    table.add_column("ink_density", ColumnType::numeric);
    table.add_column("ink_inside_fraction", ColumnType::numeric);
    table.add_column("n_components", ColumnType::numeric);
    table.add_column("n_lines", ColumnType::numeric);
    table.add_column("dist_from_stim", ColumnType::numeric);
    table.add_column("10NN_image", ColumnType::numeric);
    table.add_column("10NN_text", ColumnType::numeric);
    table.add_column("hard_to_interpret", ColumnType::numeric);
    table.add_column("caption", ColumnType::text);
    table.add_column("categories", ColumnType::text);
    table.add_column("expert1", ColumnType::numeric);
    table.add_column("expert2", ColumnType::numeric);
    table.add_column("expert", ColumnType::numeric);
    table.add_column("audra", ColumnType::numeric);
    table.add_column("osc", ColumnType::numeric);
    table.add_column("automated", ColumnType::numeric);
    table.add_column("used_stim", ColumnType::numeric);
    table.add_column("flex1", ColumnType::numeric);
    table.add_column("flex2", ColumnType::numeric);

    auto set_opt = [&table](std::size_t row, const char* col,
                            const std::optional<double>& v) {
        if (v) table.set_number(row, col, *v);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        const std::size_t row = table.add_row();
        table.set_text(row, "drawing_id", r.drawing_id);
        table.set_text(row, "group", to_string(r.group));
        table.set_text(row, "subgroup", to_string(r.subgroup));
        table.set_text(row, "participant", r.participant);
        table.set_text(row, "stimulus", to_string(r.stimulus));
        table.set_number(row, "inverted", r.inverted ? 1.0 : 0.0);
        set_opt(row, "ink_density", style[i].density);
        set_opt(row, "ink_inside_fraction", style[i].inside);
        set_opt(row, "n_components", style[i].components);
        set_opt(row, "n_lines", style[i].lines);
        set_opt(row, "dist_from_stim", stim_dist[i]);
        set_opt(row, "10NN_image", knn_image[i]);
        set_opt(row, "10NN_text", knn_text[i]);
        if (captions[i] && captions[i]->valid) {
            table.set_number(row, "hard_to_interpret",
                             captions[i]->hard_to_interpret ? 1.0 : 0.0);
            table.set_text(row, "caption", captions[i]->text);
        }
        if (!r.categories.empty()) {
            std::string joined;
            for (std::size_t c = 0; c < r.categories.size(); ++c) {
                if (c) joined += '|';
                joined += r.categories[c];
            }
            table.set_text(row, "categories", joined);
        }
        set_opt(row, "expert1", r.expert1);
        set_opt(row, "expert2", r.expert2);
        set_opt(row, "expert", expert[i]);
        set_opt(row, "audra", r.audra);
        set_opt(row, "osc", r.osc);
        set_opt(row, "automated", automated[i]);
        set_opt(row, "used_stim", r.used_stim);
        set_opt(row, "flex1", r.flex1);
        set_opt(row, "flex2", r.flex2);
    }

    fs::create_directories(cfg.out_dir);
    table.save_csv(metrics_csv_path(cfg));

    // Persist the embeddings for the analysis stage, sorted by (kind, id).
    std::vector<StoredEmbedding> store;
    for (std::size_t i = 0; i < n; ++i) {
        if (image_emb[i])
            store.push_back(StoredEmbedding{"image", records[i].drawing_id,
                                            image_emb[i]->model_id,
                                            image_emb[i]->values});
        if (text_emb[i])
            store.push_back(StoredEmbedding{"text", records[i].drawing_id,
                                            text_emb[i]->model_id, text_emb[i]->values});
    }
    for (const auto& [stim, vec] : stim_emb)
        store.push_back(StoredEmbedding{"stimulus", to_string(stim), vec.model_id,
                                        vec.values});
    std::sort(store.begin(), store.end(),
              [](const StoredEmbedding& a, const StoredEmbedding& b) {
                  return std::tie(a.kind, a.id) < std::tie(b.kind, b.id);
              });
    std::string jsonl;
    for (const auto& e : store) {
        jsonl += ordered_json{{"kind", e.kind},
                              {"id", e.id},
                              {"model_id", e.model_id},
                              {"values", e.values}}
                     .dump();
        jsonl += '\n';
    }
    write_file(embeddings_path(cfg), jsonl);

    for (auto& f : slot_fail)
        if (f) out.failures.push_back(std::move(*f));

    write_json(
        run_meta_path(cfg),
        ordered_json{
            {"version", kPipelineVersion},
            {"seed", cfg.seed},
            {"config", cfg.echo()},
            {"counts",
             ordered_json{{"records", n},
                          {"processed_images", n - out.failures.size()},
                          {"image_embeddings", n_image_emb},
                          {"text_embeddings", n_text_emb},
                          {"captions_from_manifest", caps_manifest},
                          {"captions_from_provider", caps_provider},
                          {"captions_missing_or_refused", caps_missing}}},
            {"failures", failures_json(out.failures)},
            {"warnings", out.warnings}});

    out.table = std::move(table);
    fail_if_excessive(out.failures, n, "metrics");
    return out;
}

MetricsTable run_pipeline(const RunConfig& cfg) {
    run_preprocess(cfg);
    return run_metrics(cfg).table;
}

} // namespace inkscore
