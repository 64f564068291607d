#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "inkscore/analyze.hpp"
#include "inkscore/config.hpp"
#include "inkscore/errors.hpp"
#include "inkscore/figures.hpp"
#include "inkscore/manifest.hpp"
#include "inkscore/pipeline.hpp"

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "note: " << w << "\n";
}

void print_failures(const std::vector<inkscore::DrawingFailure>& failures) {
    for (const auto& f : failures)
        std::cerr << "failed: " << f.drawing_id << ": " << f.error << "\n";
}

int cmd_ingest(const inkscore::RunConfig& cfg) {
    const auto records = inkscore::ingest_manifest(cfg.manifest);
    std::map<std::string, std::size_t> by_group, by_subgroup;
    for (const auto& r : records) {
        ++by_group[to_string(r.group)];
        ++by_subgroup[to_string(r.subgroup)];
    }
    std::cout << records.size() << " records\n";
    for (const auto& [g, n] : by_group) std::cout << "  " << g << ": " << n << "\n";
    for (const auto& [sg, n] : by_subgroup)
        std::cout << "    " << sg << ": " << n << "\n";
    return 0;
}

int cmd_preprocess(const inkscore::RunConfig& cfg) {
    const auto out = inkscore::run_preprocess(cfg);
    print_warnings(out.warnings);
    print_failures(out.failures);
    std::cout << "preprocessed " << out.n_processed << "/" << out.n_records
              << " drawings into " << inkscore::processed_dir(cfg) << "\n";
    if (out.adult_mean_thickness)
        std::cout << "adult mean thickness " << *out.adult_mean_thickness << " px, "
                  << out.n_dilated << " drawings dilated\n";
    if (out.thickness_kw)
        std::cout << "thickness Kruskal-Wallis H = " << out.thickness_kw->H
                  << ", p = " << out.thickness_kw->p << "\n";
    return 0;
}

int cmd_metrics(const inkscore::RunConfig& cfg) {
    const auto out = inkscore::run_metrics(cfg);
    print_warnings(out.warnings);
    print_failures(out.failures);
    std::cout << "metrics for " << out.table.n_rows() << " drawings ("
              << out.table.n_cols() << " columns) -> "
              << inkscore::metrics_csv_path(cfg) << "\n";
    return 0;
}

int cmd_analyze(const inkscore::RunConfig& cfg) {
    inkscore::run_analyze(cfg);
    std::cout << "report -> " << inkscore::report_json_path(cfg) << "\n";
    std::cout << "summary -> " << inkscore::report_text_path(cfg) << "\n";
    return 0;
}

int cmd_figures(const inkscore::RunConfig& cfg) {
    const auto out = inkscore::run_figures(cfg);
    print_warnings(out.notices);
    for (const auto& path : out.written) std::cout << path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drawing-corpus metrics and analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint32_t> seed;
    std::optional<std::string> cache_dir;
    bool offline = false;
    app.add_option("--config", config_path, "Run configuration (JSON)")
        ->required();
    app.add_option("--seed", seed, "Override the run seed");
    app.add_option("--cache-dir", cache_dir, "Override the provider cache directory");
    app.add_flag("--offline", offline, "Fail on any provider-cache miss");
    app.fallthrough();

    auto* ingest = app.add_subcommand("ingest", "Validate the manifest and count records");
    auto* preprocess =
        app.add_subcommand("preprocess", "Binarize, clean, resize and align drawings");
    auto* metrics =
        app.add_subcommand("metrics", "Compute style/content metrics and score columns");
    auto* analyze = app.add_subcommand("analyze", "Run the statistical analyses");
    auto* figures = app.add_subcommand("figures", "Render report figures as SVG");
    auto* all = app.add_subcommand("all", "Full pipeline: preprocess through figures");

    CLI11_PARSE(app, argc, argv);

    try {
        inkscore::RunConfig cfg = inkscore::load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
            if (!cfg.hough_seed_explicit) cfg.hough.seed = *seed;
        }
        if (cache_dir) cfg.cache_dir = *cache_dir;
        if (offline) cfg.offline = true;

        if (ingest->parsed()) return cmd_ingest(cfg);
        if (preprocess->parsed()) return cmd_preprocess(cfg);
        if (metrics->parsed()) return cmd_metrics(cfg);
        if (analyze->parsed()) return cmd_analyze(cfg);
        if (figures->parsed()) return cmd_figures(cfg);
        if (all->parsed()) {
            int rc = cmd_preprocess(cfg);
            if (rc == 0) rc = cmd_metrics(cfg);
            if (rc == 0) rc = cmd_analyze(cfg);
            if (rc == 0) rc = cmd_figures(cfg);
            return rc;
        }
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const inkscore::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const inkscore::ProviderError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
