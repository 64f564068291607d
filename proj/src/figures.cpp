#include "inkscore/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "inkscore/csv.hpp"
#include "inkscore/errors.hpp"
#include "inkscore/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace inkscore {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw Error("quantile of an empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

BoxStats box_stats(const std::vector<double>& values) {
    if (values.empty()) throw Error("box_stats of an empty series");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    BoxStats b;
    b.q1 = quantile_sorted(sorted, 0.25);
    b.median = quantile_sorted(sorted, 0.5);
    b.q3 = quantile_sorted(sorted, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q3;
    b.whisker_hi = b.q1;
    bool any = false;
    for (double v : sorted) {
        if (v >= lo_fence && v <= hi_fence) {
            if (!any) {
                b.whisker_lo = v;
                b.whisker_hi = v;
                any = true;
            } else {
                b.whisker_lo = std::min(b.whisker_lo, v);
                b.whisker_hi = std::max(b.whisker_hi, v);
            }
        }
    }
    if (!any) {  // pathological, but keep the box well-formed
        b.whisker_lo = b.q1;
        b.whisker_hi = b.q3;
    }
    for (double v : values)
        if (v < lo_fence || v > hi_fence) b.outliers.push_back(v);
    return b;
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string value_str(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Escapes the five XML-special characters for text nodes/attributes.
std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

struct SignificantPair {
    std::size_t a = 0;
    std::size_t b = 0;
    double p = 1.0;
};

std::string render_boxplot_svg(const std::string& title,
                               const std::vector<std::string>& groups,
                               const std::vector<std::vector<double>>& series,
                               const std::vector<SignificantPair>& pairs) {
    const std::size_t n = groups.size();
    const double slot_w = 90.0;
    const double margin_l = 70.0, margin_r = 30.0, margin_b = 90.0;
    const double bracket_h = 22.0;
    const double margin_t = 40.0 + bracket_h * static_cast<double>(pairs.size());
    const double plot_h = 320.0;
    const double width = margin_l + slot_w * static_cast<double>(n) + margin_r;
    const double height = margin_t + plot_h + margin_b;

    std::vector<BoxStats> boxes;
    double vmin = 0.0, vmax = 0.0;
    bool first = true;
    for (const auto& s : series) {
        boxes.push_back(box_stats(s));
        for (double v : s) {
            if (first) {
                vmin = vmax = v;
                first = false;
            } else {
                vmin = std::min(vmin, v);
                vmax = std::max(vmax, v);
            }
        }
    }
    double pad = (vmax - vmin) * 0.05;
    if (pad <= 0.0) pad = std::abs(vmax) > 0.0 ? std::abs(vmax) * 0.1 : 1.0;
    vmin -= pad;
    vmax += pad;

    auto y_of = [&](double v) {
        return margin_t + plot_h - (v - vmin) / (vmax - vmin) * plot_h;
    };
    auto x_of = [&](std::size_t g) {
        return margin_l + slot_w * (static_cast<double>(g) + 0.5);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
        << num(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";

    // Axis with min/mid/max ticks.
    svg << "<line x1=\"" << num(margin_l) << "\" y1=\"" << num(margin_t) << "\" x2=\""
        << num(margin_l) << "\" y2=\"" << num(margin_t + plot_h)
        << "\" stroke=\"black\"/>\n";
    for (double frac : {0.0, 0.5, 1.0}) {
        const double v = vmin + (vmax - vmin) * frac;
        const double y = y_of(v);
        svg << "<line x1=\"" << num(margin_l - 5) << "\" y1=\"" << num(y) << "\" x2=\""
            << num(margin_l) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(margin_l - 9) << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << value_str(v) << "</text>\n";
    }

    const double box_w = slot_w * 0.46;
    for (std::size_t g = 0; g < n; ++g) {
        const BoxStats& b = boxes[g];
        const double cx = x_of(g);
        const double x0 = cx - box_w / 2, x1 = cx + box_w / 2;
        // whiskers
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(b.whisker_lo))
            << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y_of(b.q1))
            << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(b.q3)) << "\" x2=\""
            << num(cx) << "\" y2=\"" << num(y_of(b.whisker_hi))
            << "\" stroke=\"black\"/>\n";
        for (double w : {b.whisker_lo, b.whisker_hi})
            svg << "<line x1=\"" << num(cx - box_w / 4) << "\" y1=\"" << num(y_of(w))
                << "\" x2=\"" << num(cx + box_w / 4) << "\" y2=\"" << num(y_of(w))
                << "\" stroke=\"black\"/>\n";
        // box + median
        svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y_of(b.q3)) << "\" width=\""
            << num(x1 - x0) << "\" height=\"" << num(y_of(b.q1) - y_of(b.q3))
            << "\" fill=\"#cfe2f3\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y_of(b.median))
            << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y_of(b.median))
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        for (double o : b.outliers)
            svg << "<circle class=\"outlier\" cx=\"" << num(cx) << "\" cy=\""
                << num(y_of(o)) << "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
        // label
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(margin_t + plot_h + 16)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
               "transform=\"rotate(-35 "
            << num(cx) << " " << num(margin_t + plot_h + 16) << ")\">"
            << xml_escape(groups[g]) << "</text>\n";
    }

    // Brackets for significant pairs, stacked above the plot.
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double y = margin_t - 8.0 - bracket_h * static_cast<double>(k);
        const double xa = x_of(pairs[k].a), xb = x_of(pairs[k].b);
        svg << "<path class=\"bracket\" d=\"M " << num(xa) << " " << num(y + 6)
            << " L " << num(xa) << " " << num(y) << " L " << num(xb) << " " << num(y)
            << " L " << num(xb) << " " << num(y + 6)
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num((xa + xb) / 2) << "\" y=\"" << num(y - 3)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">**</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

std::string series_table(const std::vector<std::string>& groups,
                         const std::vector<std::vector<double>>& series) {
    std::ostringstream out;
    out << "group\tn\tvalues\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out << groups[g] << "\t" << series[g].size() << "\t";
        for (std::size_t i = 0; i < series[g].size(); ++i) {
            if (i) out << " ";
            out << value_str(series[g][i]);
        }
        out << "\n";
    }
    return out.str();
}

// Bottom-up dendrogram: leaves along the x axis, merge height on y.
std::string render_dendrogram_svg(const std::string& title,
                                  const std::vector<std::string>& leaf_ids,
                                  const ordered_json& merges) {
    const std::size_t n = leaf_ids.size();
    const double slot_w = 26.0;
    const double margin_l = 60.0, margin_r = 20.0, margin_t = 40.0, margin_b = 110.0;
    const double plot_h = 300.0;
    const double width =
        margin_l + slot_w * static_cast<double>(std::max<std::size_t>(n, 1)) + margin_r;
    const double height = margin_t + plot_h + margin_b;

    double max_h = 0.0;
    for (const auto& m : merges) max_h = std::max(max_h, m.at("height").get<double>());
    if (max_h <= 0.0) max_h = 1.0;
    auto y_of = [&](double h) { return margin_t + plot_h - h / max_h * plot_h; };

    // Cluster id -> (x center, y of its top). Leaves are 0..n-1; merge m
    // creates id n+m.
    std::vector<double> cx(n + merges.size()), cy(n + merges.size());
    for (std::size_t i = 0; i < n; ++i) {
        cx[i] = margin_l + slot_w * (static_cast<double>(i) + 0.5);
        cy[i] = margin_t + plot_h;
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
        << num(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";

    for (std::size_t i = 0; i < n; ++i) {
        svg << "<line class=\"leaf\" x1=\"" << num(cx[i]) << "\" y1=\""
            << num(margin_t + plot_h) << "\" x2=\"" << num(cx[i]) << "\" y2=\""
            << num(margin_t + plot_h + 4) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(cx[i]) << "\" y=\"" << num(margin_t + plot_h + 8)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\" "
               "transform=\"rotate(-90 "
            << num(cx[i]) << " " << num(margin_t + plot_h + 8) << ")\">"
            << xml_escape(leaf_ids[i]) << "</text>\n";
    }

    std::size_t next = n;
    for (const auto& m : merges) {
        const std::size_t l = m.at("left").get<std::size_t>();
        const std::size_t r = m.at("right").get<std::size_t>();
        const double y = y_of(m.at("height").get<double>());
        svg << "<path d=\"M " << num(cx[l]) << " " << num(cy[l]) << " L " << num(cx[l])
            << " " << num(y) << " L " << num(cx[r]) << " " << num(y) << " L "
            << num(cx[r]) << " " << num(cy[r]) << "\" fill=\"none\" "
            << "stroke=\"black\"/>\n";
        cx[next] = (cx[l] + cx[r]) / 2.0;
        cy[next] = y;
        ++next;
    }

    // Height axis.
    svg << "<line x1=\"" << num(margin_l - 14) << "\" y1=\"" << num(margin_t)
        << "\" x2=\"" << num(margin_l - 14) << "\" y2=\"" << num(margin_t + plot_h)
        << "\" stroke=\"black\"/>\n";
    for (double frac : {0.0, 0.5, 1.0}) {
        const double h = max_h * frac;
        svg << "<text x=\"" << num(margin_l - 18) << "\" y=\"" << num(y_of(h) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << value_str(h) << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

struct Emitter {
    std::string dir;
    FigureOutcome outcome;

    void write(const std::string& name, const std::string& content) {
        const std::string path = (fs::path(dir) / name).string();
        write_file(path, content);
        outcome.written.push_back(path);
    }
};

void emit_comparison_figure(Emitter& em, const std::string& stem,
                            const std::string& title, const ordered_json& j) {
    std::vector<std::string> groups;
    std::vector<std::vector<double>> series;
    for (const auto& g : j.at("groups")) groups.push_back(g.get<std::string>());
    for (const auto& s : j.at("series"))
        series.push_back(s.get<std::vector<double>>());
    bool empty = groups.empty();
    for (const auto& s : series) empty = empty || s.empty();
    if (empty) {
        em.outcome.notices.push_back("figure '" + stem + "' skipped: empty series");
        return;
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t g = 0; g < groups.size(); ++g) index[groups[g]] = g;
    std::vector<SignificantPair> pairs;
    if (j.contains("pairwise") && j.at("pairwise").is_array()) {
        for (const auto& p : j.at("pairwise")) {
            if (!p.at("significant").get<bool>()) continue;
            pairs.push_back(SignificantPair{index.at(p.at("a").get<std::string>()),
                                            index.at(p.at("b").get<std::string>()),
                                            p.at("p_adjusted").get<double>()});
        }
    }
    em.write(stem + ".svg", render_boxplot_svg(title, groups, series, pairs));
    em.write(stem + ".txt", series_table(groups, series));
}

} // namespace

FigureOutcome emit_figures(const ordered_json& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Emitter em;
    em.dir = out_dir;

    if (report.contains("group_compare")) {
        for (const auto& m : report.at("group_compare").at("metrics")) {
            const std::string metric = m.at("metric").get<std::string>();
            emit_comparison_figure(em, "boxplot_" + metric, metric + " by subgroup",
                                   m);
        }
    }

    if (report.contains("flexibility")) {
        const auto& fx = report.at("flexibility");
        if (fx.contains("groups"))
            emit_comparison_figure(em, "boxplot_flexibility",
                                   "flexibility by subgroup", fx);
        else
            em.outcome.notices.push_back(
                "figure 'boxplot_flexibility' skipped: empty series");
    }

    if (report.contains("diversity")) {
        const auto& cl = report.at("diversity").at("clustering");
        if (cl.is_null()) {
            em.outcome.notices.push_back(
                "figure 'dendrogram_captions' skipped: no clustering");
        } else {
            std::vector<std::string> leaf_ids;
            for (const auto& id : cl.at("leaf_ids"))
                leaf_ids.push_back(id.get<std::string>());
            em.write("dendrogram_captions.svg",
                     render_dendrogram_svg("caption themes", leaf_ids,
                                           cl.at("merges")));
            std::ostringstream data;
            data << "leaf\tid\n";
            for (std::size_t i = 0; i < leaf_ids.size(); ++i)
                data << i << "\t" << leaf_ids[i] << "\n";
            data << "merge\tleft\tright\theight\tsize\n";
            std::size_t k = 0;
            for (const auto& m : cl.at("merges")) {
                data << k++ << "\t" << m.at("left").get<int>() << "\t"
                     << m.at("right").get<int>() << "\t"
                     << value_str(m.at("height").get<double>()) << "\t"
                     << m.at("size").get<int>() << "\n";
            }
            em.write("dendrogram_captions.txt", data.str());
        }
    }

    return std::move(em.outcome);
}

FigureOutcome run_figures(const RunConfig& cfg) {
    const std::string content = read_file(report_json_path(cfg));
    ordered_json report;
    try {
        report = ordered_json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("figures: report.json: ") + e.what());
    }
    return emit_figures(report, figures_dir(cfg));
}

} // namespace inkscore
