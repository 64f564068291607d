#include "inkscore/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "inkscore/content.hpp"
#include "inkscore/csv.hpp"
#include "inkscore/model_eval.hpp"
#include "inkscore/stats.hpp"

using nlohmann::ordered_json;

namespace inkscore {

namespace {

constexpr const char* kReportVersion = "1.0.0";

std::string fnum(double v, const char* spec = "%.4g") {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}
std::string f3(double v) { return fnum(v, "%.3f"); }

void require_columns(const MetricsTable& table, const char* analysis,
                     std::initializer_list<const char*> cols) {
    std::vector<std::string> missing;
    for (const char* c : cols)
        if (!table.has_column(c)) missing.emplace_back(c);
    if (missing.empty()) return;
    std::string msg = std::string("analyze: ") + analysis + " requires column";
    if (missing.size() > 1) msg += "s";
    for (std::size_t i = 0; i < missing.size(); ++i)
        msg += (i ? ", '" : " '") + missing[i] + "'";
    throw ValidationError(msg);
}

const std::vector<std::string>& subgroup_order() {
    static const std::vector<std::string> order = {
        to_string(Subgroup::pre_schematic), to_string(Subgroup::schematic),
        to_string(Subgroup::adult),         to_string(Subgroup::prompt1),
        to_string(Subgroup::prompt2),       to_string(Subgroup::prompt3)};
    return order;
}

struct GroupedSeries {
    std::vector<std::string> groups;          // only groups with data
    std::vector<std::vector<double>> series;  // aligned with groups
    std::map<std::string, std::size_t> row_counts;  // all rows per group key
};

GroupedSeries collect_series(const MetricsTable& table, const std::string& value_col,
                             const std::string& by_col) {
    GroupedSeries out;
    std::map<std::string, std::vector<double>> buckets;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (!table.present(r, by_col)) continue;
        const std::string key = table.text(r, by_col);
        ++out.row_counts[key];
        if (auto v = table.maybe_number(r, value_col)) buckets[key].push_back(*v);
    }
    std::vector<std::string> order;
    if (by_col == "subgroup") {
        order = subgroup_order();
        for (const auto& [key, unused] : buckets)
            if (std::find(order.begin(), order.end(), key) == order.end())
                order.push_back(key);
    } else {
        for (const auto& [key, unused] : buckets) order.push_back(key);
    }
    for (const std::string& key : order) {
        auto it = buckets.find(key);
        if (it == buckets.end() || it->second.empty()) continue;
        out.groups.push_back(key);
        out.series.push_back(it->second);
    }
    return out;
}

ordered_json kw_json(const KWResult& kw) {
    return ordered_json{{"H", kw.H}, {"df", kw.df}, {"p", kw.p}};
}

ordered_json pairwise_json(const std::vector<PairwiseTest>& tests,
                           const std::vector<std::string>& groups) {
    ordered_json arr = ordered_json::array();
    for (const auto& t : tests)
        arr.push_back(ordered_json{{"a", groups[t.a]},
                                   {"b", groups[t.b]},
                                   {"U", t.U},
                                   {"p_adjusted", t.p_adjusted},
                                   {"significant", t.significant}});
    return arr;
}

ordered_json summary_json(const GroupedSeries& gs) {
    ordered_json arr = ordered_json::array();
    for (std::size_t g = 0; g < gs.groups.size(); ++g) {
        const auto& xs = gs.series[g];
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        const std::size_t rows = gs.row_counts.at(gs.groups[g]);
        arr.push_back(ordered_json{{"key", gs.groups[g]},
                                   {"mean", mean},
                                   {"sd", sd},
                                   {"n", xs.size()},
                                   {"missing", rows - xs.size()}});
    }
    return arr;
}

// Comparison block shared by group_compare metrics and flexibility scores:
// summary stats, Kruskal-Wallis, and Bonferroni-adjusted pairwise tests.
ordered_json comparison_json(const GroupedSeries& gs, std::vector<std::string>* notices,
                             const std::string& label) {
    ordered_json j;
    j["groups"] = gs.groups;
    ordered_json series = ordered_json::array();
    for (const auto& s : gs.series) series.push_back(s);
    j["series"] = series;
    j["summary"] = summary_json(gs);
    if (gs.groups.size() >= 2) {
        j["kruskal_wallis"] = kw_json(kruskal_wallis(gs.series));
        j["pairwise"] = pairwise_json(pairwise_group_tests(gs.series), gs.groups);
    } else {
        j["kruskal_wallis"] = nullptr;
        j["pairwise"] = ordered_json::array();
        if (notices)
            notices->push_back(label + ": fewer than two groups with data; "
                                       "comparison skipped");
    }
    return j;
}

ordered_json coefficients_json(const FitResult& fit) {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < fit.betas.size(); ++i)
        arr.push_back(ordered_json{{"term", fit.term_names[i]},
                                   {"beta", fit.betas[i]},
                                   {"p", fit.coef_p[i]}});
    return arr;
}

// --- sections --------------------------------------------------------------

ordered_json section_group_compare(const MetricsTable& table) {
    require_columns(table, "group_compare", {"subgroup"});
    static const char* kMetricCols[] = {"ink_density", "ink_inside_fraction",
                                        "n_components", "n_lines",
                                        "dist_from_stim", "10NN_image",
                                        "10NN_text",     "expert",
                                        "automated",     "used_stim"};
    std::vector<std::string> notices;
    ordered_json metrics = ordered_json::array();
    for (const char* col : kMetricCols) {
        if (!table.has_column(col)) continue;
        GroupedSeries gs = collect_series(table, col, "subgroup");
        if (gs.groups.empty()) {
            notices.push_back(std::string(col) + ": no data");
            continue;
        }
        ordered_json m;
        m["metric"] = col;
        ordered_json cmp = comparison_json(gs, &notices, col);
        m.update(cmp);
        metrics.push_back(std::move(m));
    }
    return ordered_json{{"by", "subgroup"}, {"metrics", metrics}, {"notices", notices}};
}

ordered_json pair_icc(const MetricsTable& table, const char* col_a, const char* col_b,
                      std::vector<std::string>* notices) {
    std::vector<double> values;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        auto a = table.maybe_number(r, col_a);
        auto b = table.maybe_number(r, col_b);
        if (a && b) {
            values.push_back(*a);
            values.push_back(*b);
        }
    }
    const std::size_t n = values.size() / 2;
    if (n < 2) {
        notices->push_back(std::string("agreement: fewer than two rows rated by both '") +
                           col_a + "' and '" + col_b + "'");
        return nullptr;
    }
    RatingsMatrix m;
    m.n_subjects = n;
    m.n_raters = 2;
    m.values = std::move(values);
    try {
        const double icc = icc_average_fixed(m);
        return ordered_json{{"raters", ordered_json::array({col_a, col_b})},
                            {"icc", icc},
                            {"n", n}};
    } catch (const std::exception& e) {
        notices->push_back(std::string("agreement: ICC(") + col_a + ", " + col_b +
                           ") failed: " + e.what());
        return nullptr;
    }
}

ordered_json section_agreement(const MetricsTable& table) {
    require_columns(table, "agreement",
                    {"expert1", "expert2", "audra", "osc", "expert", "automated"});
    std::vector<std::string> notices;
    ordered_json j;
    j["expert_raters"] = pair_icc(table, "expert1", "expert2", &notices);
    j["automated_raters"] = pair_icc(table, "audra", "osc", &notices);

    std::vector<double> xs, ys, inter;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        auto e = table.maybe_number(r, "expert");
        auto a = table.maybe_number(r, "automated");
        if (e && a) {
            xs.push_back(*e);
            ys.push_back(*a);
            inter.push_back(*e);
            inter.push_back(*a);
        }
    }
    if (xs.size() >= 3) {
        ordered_json cross;
        try {
            const SpearmanResult sp = spearman(xs, ys);
            cross["spearman_rho"] = sp.rho;
            cross["p"] = sp.p;
        } catch (const std::exception& e) {
            cross["spearman_rho"] = nullptr;
            cross["p"] = nullptr;
            notices.push_back(std::string("agreement: expert vs automated Spearman "
                                          "failed: ") +
                              e.what());
        }
        RatingsMatrix m;
        m.n_subjects = xs.size();
        m.n_raters = 2;
        m.values = std::move(inter);
        try {
            cross["icc"] = icc_average_fixed(m);
        } catch (const std::exception& e) {
            cross["icc"] = nullptr;
            notices.push_back(std::string("agreement: expert vs automated ICC "
                                          "failed: ") +
                              e.what());
        }
        cross["n"] = xs.size();
        j["expert_vs_automated"] = cross;
    } else {
        j["expert_vs_automated"] = nullptr;
        notices.push_back(
            "agreement: fewer than three rows carry both expert and automated "
            "scores");
    }
    j["notices"] = notices;
    return j;
}

ordered_json section_models(const MetricsTable& table, const RunConfig& cfg) {
    std::vector<std::string> notices;
    std::vector<ModelSpec> specs;
    for (const std::string& formula : cfg.analysis.models) {
        try {
            specs.push_back(parse_formula(formula));
        } catch (const std::exception& e) {
            notices.push_back("formula '" + formula + "': " + e.what());
        }
    }

    std::vector<std::string> responses;
    for (const auto& s : specs)
        if (std::find(responses.begin(), responses.end(), s.response) ==
            responses.end())
            responses.push_back(s.response);

    ordered_json per_response = ordered_json::array();
    std::map<std::string, ModelSpec> best_by_response;
    for (const std::string& resp : responses) {
        std::vector<ModelSpec> mine;
        for (const auto& s : specs)
            if (s.response == resp) mine.push_back(s);

        ordered_json entry;
        entry["response"] = resp;
        std::vector<std::string> rnotices;
        ordered_json ranking = ordered_json::array();
        try {
            ModelRanking mr = compare_models(mine, table);
            rnotices.insert(rnotices.end(), mr.notices.begin(), mr.notices.end());
            for (const RankedModel& rm : mr.ranked) {
                ordered_json row;
                row["formula"] = render_formula(rm.spec);
                row["bic"] = rm.fit.bic;
                row["loglik"] = rm.fit.loglik;
                row["n"] = rm.fit.n;
                row["sigma2"] = rm.fit.sigma2;
                row["tau2"] = rm.fit.tau2;
                row["coefficients"] = coefficients_json(rm.fit);
                try {
                    const CVReport cv =
                        cross_validate(rm.spec, table, cfg.analysis.n_folds,
                                       cfg.analysis.stratify_by, cfg.seed);
                    row["cv"] = ordered_json{{"r2_test", cv.r2_test},
                                             {"cor_test", cv.cor_test},
                                             {"fold_r2", cv.fold_r2},
                                             {"fold_cor", cv.fold_cor},
                                             {"n_folds", cv.n_folds},
                                             {"n_rows", cv.n_rows}};
                } catch (const std::exception& e) {
                    row["cv"] = nullptr;
                    rnotices.push_back("cross-validation of '" +
                                       render_formula(rm.spec) + "': " + e.what());
                }
                ranking.push_back(std::move(row));
            }
            if (!mr.ranked.empty())
                best_by_response.emplace(resp, mr.ranked.front().spec);
        } catch (const std::exception& e) {
            rnotices.push_back(std::string("model comparison failed: ") + e.what());
        }
        entry["ranking"] = std::move(ranking);
        entry["notices"] = rnotices;
        per_response.push_back(std::move(entry));
    }

    // Side-by-side coefficient table over the union of the winning models'
    // main effects, every response refitted on one shared row set.
    ordered_json combined = nullptr;
    std::vector<Term> predictors;
    for (const std::string& resp : responses) {
        auto it = best_by_response.find(resp);
        if (it == best_by_response.end()) continue;
        for (const Term& t : it->second.fixed_terms) {
            if (t.factors.size() != 1) continue;
            const bool seen =
                std::any_of(predictors.begin(), predictors.end(),
                            [&](const Term& p) { return p.same_factors(t); });
            if (!seen) predictors.push_back(t);
        }
    }
    if (predictors.empty()) {
        notices.push_back("combined model skipped: no main effects survive");
    } else if (responses.size() < 1) {
        notices.push_back("combined model skipped: no responses");
    } else {
        std::optional<std::string> random;
        if (cfg.analysis.combined_random_intercept)
            random = cfg.analysis.combined_random_group;
        try {
            const CombinedModelReport rep =
                combined_model_report(predictors, responses, table, random);
            ordered_json rows = ordered_json::array();
            for (std::size_t t = 0; t < predictors.size(); ++t) {
                ordered_json row;
                row["term"] = predictors[t].name();
                ordered_json per = ordered_json::array();
                for (std::size_t r = 0; r < rep.responses.size(); ++r) {
                    const CoefficientRow& c = rep.coefficients[r][t];
                    per.push_back(ordered_json{{"response", rep.responses[r]},
                                               {"beta", c.beta},
                                               {"p", c.p},
                                               {"significant", c.significant},
                                               {"vif", c.vif}});
                }
                row["per_response"] = std::move(per);
                rows.push_back(std::move(row));
            }
            combined = ordered_json{
                {"predictors",
                 [&] {
                     ordered_json names = ordered_json::array();
                     for (const auto& p : predictors) names.push_back(p.name());
                     return names;
                 }()},
                {"responses", rep.responses},
                {"random_intercept",
                 rep.random_intercept ? ordered_json(*rep.random_intercept)
                                      : ordered_json(nullptr)},
                {"n_rows", rep.n_rows},
                {"rows", rows}};
        } catch (const std::exception& e) {
            notices.push_back(std::string("combined model failed: ") + e.what());
        }
    }

    return ordered_json{{"n_folds", cfg.analysis.n_folds},
                        {"stratify_by", cfg.analysis.stratify_by},
                        {"seed", cfg.seed},
                        {"responses", per_response},
                        {"combined", combined},
                        {"notices", notices}};
}

std::vector<std::string> split_pipe_cell(const std::string& cell) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : cell) {
        if (c == '|') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

ordered_json section_diversity(const MetricsTable& table,
                               const std::vector<StoredEmbedding>& embeddings,
                               const RunConfig& cfg) {
    require_columns(table, "diversity",
                    {"drawing_id", "categories", "subgroup", "group", "caption"});
    std::vector<std::string> notices;

    std::vector<CategoryAnnotation> annotations;
    std::map<std::string, std::string> by_subgroup, by_group;
    std::map<std::string, std::string> caption_of;
    std::set<std::string> vocabulary;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const std::string id = table.text(r, "drawing_id");
        by_subgroup[id] = table.text(r, "subgroup");
        by_group[id] = table.text(r, "group");
        if (table.present(r, "caption")) caption_of[id] = table.text(r, "caption");
        if (!table.present(r, "categories")) continue;
        CategoryAnnotation a;
        a.drawing_id = id;
        a.categories = split_pipe_cell(table.text(r, "categories"));
        if (a.categories.empty()) continue;
        for (const auto& c : a.categories) vocabulary.insert(c);
        annotations.push_back(std::move(a));
    }

    ordered_json j;
    j["n_annotated"] = annotations.size();
    j["n_categories"] = vocabulary.size();
    if (annotations.empty()) {
        j["by_subgroup"] = ordered_json::object();
        j["by_group"] = ordered_json::object();
        notices.push_back("no category annotations; diversity ratios skipped");
    } else {
        j["by_subgroup"] = conceptual_diversity(annotations, by_subgroup);
        j["by_group"] = conceptual_diversity(annotations, by_group);
    }

    // Caption themes: average-linkage clustering of the text embeddings.
    std::vector<EmbeddingEntry> entries;
    std::string model_id;
    for (const auto& e : embeddings) {
        if (e.kind != "text") continue;
        entries.push_back(EmbeddingEntry{e.id, e.values});
        model_id = e.model_id;
    }
    std::sort(entries.begin(), entries.end(),
              [](const EmbeddingEntry& a, const EmbeddingEntry& b) {
                  return a.id < b.id;
              });
    if (entries.size() < 2) {
        j["clustering"] = nullptr;
        notices.push_back("fewer than two caption embeddings; clustering skipped");
    } else {
        CutRule cut = CutRule::by_count(1);
        ordered_json cut_j;
        if (cfg.analysis.cluster_n_themes > 0) {
            const int k = std::min<int>(cfg.analysis.cluster_n_themes,
                                        static_cast<int>(entries.size()));
            cut = CutRule::by_count(k);
            cut_j = ordered_json{{"n_clusters", k}};
        } else {
            cut = CutRule::by_distance(*cfg.analysis.cluster_cut_distance);
            cut_j = ordered_json{{"distance", *cfg.analysis.cluster_cut_distance}};
        }
        const ClusterResult res = cluster_embeddings(entries, cut);

        ordered_json leaf_ids = ordered_json::array();
        for (const auto& e : entries) leaf_ids.push_back(e.id);
        ordered_json merges = ordered_json::array();
        for (const Merge& m : res.dendrogram.merges)
            merges.push_back(ordered_json{{"left", m.left},
                                          {"right", m.right},
                                          {"height", m.height},
                                          {"size", m.size}});

        const int n_themes =
            res.labels.empty()
                ? 0
                : *std::max_element(res.labels.begin(), res.labels.end()) + 1;
        ordered_json themes = ordered_json::array();
        for (int t = 0; t < n_themes; ++t) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < res.labels.size(); ++i)
                if (res.labels[i] == t) members.push_back(i);
            // Medoid: the member closest to all others, ties to the smaller id.
            std::size_t medoid = members.front();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a : members) {
                double total = 0.0;
                for (std::size_t b : members)
                    if (a != b)
                        total += cosine_distance(entries[a].embedding,
                                                 entries[b].embedding);
                if (total < best) {
                    best = total;
                    medoid = a;
                }
            }
            const std::string& mid = entries[medoid].id;
            auto cap = caption_of.find(mid);
            themes.push_back(ordered_json{
                {"theme", t},
                {"size", members.size()},
                {"medoid_id", mid},
                {"medoid_caption", cap != caption_of.end() ? ordered_json(cap->second)
                                                           : ordered_json(nullptr)}});
        }
        j["clustering"] = ordered_json{{"kind", "text"},
                                       {"model_id", model_id},
                                       {"n_leaves", entries.size()},
                                       {"cut", cut_j},
                                       {"leaf_ids", leaf_ids},
                                       {"merges", merges},
                                       {"themes", themes}};
    }
    j["notices"] = notices;
    return j;
}

ordered_json section_flexibility(const MetricsTable& table, const RunConfig& cfg) {
    require_columns(table, "flexibility",
                    {"drawing_id", "subgroup", "participant", "stimulus", "flex1",
                     "flex2"});
    std::vector<std::string> notices;

    std::vector<DrawingRecord> records;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (!table.present(r, "subgroup") || !table.present(r, "participant") ||
            !table.present(r, "stimulus"))
            continue;
        DrawingRecord rec;
        rec.drawing_id = table.text(r, "drawing_id");
        rec.subgroup = subgroup_from_string(table.text(r, "subgroup"));
        rec.group = group_of(rec.subgroup);
        rec.participant = table.text(r, "participant");
        rec.stimulus = stimulus_from_string(table.text(r, "stimulus"));
        rec.flex1 = table.maybe_number(r, "flex1");
        rec.flex2 = table.maybe_number(r, "flex2");
        records.push_back(std::move(rec));
    }

    const std::vector<FlexibilitySet> sets =
        build_flexibility_sets(records, cfg.seed, &notices);

    GroupedSeries gs;
    std::map<std::string, std::vector<double>> buckets;
    for (const auto& s : sets) buckets[to_string(s.subgroup)].push_back(s.score);
    for (const std::string& key : subgroup_order()) {
        auto it = buckets.find(key);
        if (it == buckets.end()) continue;
        gs.groups.push_back(key);
        gs.series.push_back(it->second);
        gs.row_counts[key] = it->second.size();
    }

    ordered_json j;
    j["n_sets"] = sets.size();
    if (!sets.empty()) {
        ordered_json cmp = comparison_json(gs, &notices, "flexibility");
        j.update(cmp);
    } else {
        notices.push_back("no flexibility sets could be built");
    }
    ordered_json set_arr = ordered_json::array();
    for (const auto& s : sets) {
        ordered_json e{{"set_id", s.set_id},
                       {"subgroup", to_string(s.subgroup)},
                       {"drawing_ids", s.drawing_ids},
                       {"score", s.score}};
        e["score1"] = s.score1 ? ordered_json(*s.score1) : ordered_json(nullptr);
        e["score2"] = s.score2 ? ordered_json(*s.score2) : ordered_json(nullptr);
        set_arr.push_back(std::move(e));
    }
    j["sets"] = std::move(set_arr);
    j["notices"] = notices;
    return j;
}

// --- text rendering ----------------------------------------------------------

void render_comparison(std::ostringstream& out, const ordered_json& j,
                       const std::string& indent) {
    out << indent << "group            n      mean        sd\n";
    for (const auto& s : j.at("summary")) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-15s %4zu %9s %9s",
                      s.at("key").get<std::string>().c_str(),
                      s.at("n").get<std::size_t>(),
                      f3(s.at("mean").get<double>()).c_str(),
                      f3(s.at("sd").get<double>()).c_str());
        out << indent << line << "\n";
    }
    if (!j.at("kruskal_wallis").is_null()) {
        const auto& kw = j.at("kruskal_wallis");
        out << indent << "Kruskal-Wallis H = " << fnum(kw.at("H").get<double>())
            << " (df " << kw.at("df").get<int>()
            << "), p = " << fnum(kw.at("p").get<double>()) << "\n";
    }
    bool any = false;
    for (const auto& p : j.at("pairwise")) {
        if (!p.at("significant").get<bool>()) continue;
        if (!any) {
            out << indent << "pairs at adjusted p < 0.01:\n";
            any = true;
        }
        out << indent << "  " << p.at("a").get<std::string>() << " vs "
            << p.at("b").get<std::string>()
            << " (p = " << fnum(p.at("p_adjusted").get<double>()) << ")\n";
    }
    if (!any && j.at("pairwise").is_array() && !j.at("pairwise").empty())
        out << indent << "no pair significant at adjusted p < 0.01\n";
}

void render_notices(std::ostringstream& out, const ordered_json& j) {
    if (!j.contains("notices")) return;
    for (const auto& n : j.at("notices"))
        out << "  note: " << n.get<std::string>() << "\n";
}

std::string render_text(const ordered_json& report) {
    std::ostringstream out;
    out << "Corpus analysis report (seed " << report.at("seed").get<std::uint32_t>()
        << ")\n";

    if (report.contains("group_compare")) {
        const auto& gc = report.at("group_compare");
        out << "\n== Subgroup comparison ==\n";
        for (const auto& m : gc.at("metrics")) {
            out << "\n[" << m.at("metric").get<std::string>() << "]\n";
            render_comparison(out, m, "  ");
        }
        render_notices(out, gc);
    }

    if (report.contains("agreement")) {
        const auto& ag = report.at("agreement");
        out << "\n== Rater agreement ==\n";
        auto icc_line = [&](const char* label, const ordered_json& v) {
            if (v.is_null()) return;
            out << "  " << label << ": ICC = " << f3(v.at("icc").get<double>())
                << " (n = " << v.at("n").get<std::size_t>() << ")\n";
        };
        icc_line("expert raters", ag.at("expert_raters"));
        icc_line("automated raters", ag.at("automated_raters"));
        const auto& cross = ag.at("expert_vs_automated");
        if (!cross.is_null()) {
            out << "  expert vs automated:";
            if (!cross.at("spearman_rho").is_null())
                out << " Spearman rho = " << f3(cross.at("spearman_rho").get<double>())
                    << " (p = " << fnum(cross.at("p").get<double>()) << ")";
            if (!cross.at("icc").is_null())
                out << ", ICC = " << f3(cross.at("icc").get<double>());
            out << " (n = " << cross.at("n").get<std::size_t>() << ")\n";
        }
        render_notices(out, ag);
    }

    if (report.contains("models")) {
        const auto& mo = report.at("models");
        out << "\n== Models ==\n";
        for (const auto& resp : mo.at("responses")) {
            out << "\nresponse '" << resp.at("response").get<std::string>()
                << "' (BIC ascending):\n";
            int rank = 0;
            for (const auto& row : resp.at("ranking")) {
                out << "  " << ++rank << ". " << row.at("formula").get<std::string>()
                    << "\n     BIC " << fnum(row.at("bic").get<double>())
                    << ", log-likelihood " << fnum(row.at("loglik").get<double>())
                    << ", n " << row.at("n").get<std::size_t>() << "\n";
                if (!row.at("cv").is_null()) {
                    const auto& cv = row.at("cv");
                    out << "     CV: R2 = " << f3(cv.at("r2_test").get<double>())
                        << ", Spearman = " << f3(cv.at("cor_test").get<double>())
                        << " (" << cv.at("n_folds").get<int>() << " folds)\n";
                }
                out << "     coefficients:\n";
                for (const auto& c : row.at("coefficients"))
                    out << "       " << c.at("term").get<std::string>() << " = "
                        << f3(c.at("beta").get<double>())
                        << " (p = " << fnum(c.at("p").get<double>()) << ")\n";
            }
            for (const auto& n : resp.at("notices"))
                out << "  note: " << n.get<std::string>() << "\n";
        }
        const auto& comb = mo.at("combined");
        if (!comb.is_null()) {
            out << "\ncombined model (";
            if (!comb.at("random_intercept").is_null())
                out << "random intercept: "
                    << comb.at("random_intercept").get<std::string>() << ", ";
            out << "n = " << comb.at("n_rows").get<std::size_t>() << "):\n";
            for (const auto& row : comb.at("rows")) {
                out << "  " << row.at("term").get<std::string>() << ":";
                for (const auto& pr : row.at("per_response")) {
                    out << "  [" << pr.at("response").get<std::string>()
                        << "] beta = " << f3(pr.at("beta").get<double>())
                        << (pr.at("significant").get<bool>() ? "*" : "")
                        << " (p = " << fnum(pr.at("p").get<double>())
                        << ", VIF = " << f3(pr.at("vif").get<double>()) << ")";
                }
                out << "\n";
            }
        }
        render_notices(out, mo);
    }

    if (report.contains("diversity")) {
        const auto& dv = report.at("diversity");
        out << "\n== Conceptual diversity ==\n";
        out << "  categories: " << dv.at("n_categories").get<std::size_t>()
            << " distinct over " << dv.at("n_annotated").get<std::size_t>()
            << " annotated drawings\n";
        auto ratios = [&](const char* label, const ordered_json& m) {
            if (m.empty()) return;
            out << "  " << label << ":";
            for (const auto& [key, v] : m.items())
                out << " " << key << " = " << f3(v.get<double>());
            out << "\n";
        };
        ratios("by subgroup", dv.at("by_subgroup"));
        ratios("by group", dv.at("by_group"));
        const auto& cl = dv.at("clustering");
        if (!cl.is_null()) {
            out << "  caption themes (" << cl.at("themes").size() << " clusters over "
                << cl.at("n_leaves").get<std::size_t>() << " captions):\n";
            for (const auto& t : cl.at("themes")) {
                out << "    theme " << t.at("theme").get<int>() << " (n = "
                    << t.at("size").get<std::size_t>() << "): ";
                if (t.at("medoid_caption").is_null())
                    out << t.at("medoid_id").get<std::string>();
                else
                    out << '"' << t.at("medoid_caption").get<std::string>() << '"';
                out << "\n";
            }
        }
        render_notices(out, dv);
    }

    if (report.contains("flexibility")) {
        const auto& fx = report.at("flexibility");
        out << "\n== Flexibility ==\n";
        out << "  sets: " << fx.at("n_sets").get<std::size_t>() << "\n";
        if (fx.contains("summary")) render_comparison(out, fx, "  ");
        render_notices(out, fx);
    }

    return out.str();
}

} // namespace

ReportBundle analyze(const MetricsTable& table,
                     const std::vector<StoredEmbedding>& embeddings,
                     const RunConfig& cfg) {
    ordered_json report;
    report["version"] = kReportVersion;
    report["seed"] = cfg.seed;
    report["analyses"] = cfg.analysis.analyses;

    for (const std::string& name : cfg.analysis.analyses) {
        if (name == "group_compare") {
            report["group_compare"] = section_group_compare(table);
        } else if (name == "agreement") {
            report["agreement"] = section_agreement(table);
        } else if (name == "models") {
            report["models"] = section_models(table, cfg);
        } else if (name == "diversity") {
            report["diversity"] = section_diversity(table, embeddings, cfg);
        } else if (name == "flexibility") {
            report["flexibility"] = section_flexibility(table, cfg);
        } else {
            throw ValidationError("analyze: unknown analysis '" + name + "'");
        }
    }

    ReportBundle bundle;
    bundle.text = render_text(report);
    bundle.json = std::move(report);
    return bundle;
}

ReportBundle run_analyze(const RunConfig& cfg) {
    const MetricsTable table = load_metrics(cfg);
    const std::vector<StoredEmbedding> embeddings = load_embeddings(cfg);
    ReportBundle bundle = analyze(table, embeddings, cfg);
    write_file(report_json_path(cfg), bundle.json.dump(2) + "\n");
    write_file(report_text_path(cfg), bundle.text);
    return bundle;
}

} // namespace inkscore
