#include "inkscore/manifest.hpp"

#include <charconv>
#include <filesystem>
#include <map>
#include <set>

#include "inkscore/csv.hpp"

namespace inkscore {

const std::vector<std::string> kManifestColumns = {
    "drawing_id", "group",   "subgroup", "participant", "stimulus", "inverted",
    "image_path", "caption", "categories", "expert1",   "expert2",  "audra",
    "osc",        "used_stim", "flex1",   "flex2"};

namespace {

class RowErrors {
public:
    void add(std::size_t file_row, const std::string& message) {
        if (messages_.size() < kMax)
            messages_.push_back("row " + std::to_string(file_row) + ": " + message);
        ++count_;
    }

    void raise_if_any() const {
        if (messages_.empty()) return;
        std::string all = "manifest validation failed (" +
                          std::to_string(count_) + " problem" +
                          (count_ == 1 ? "" : "s") + "):";
        for (const std::string& m : messages_) all += "\n  " + m;
        if (count_ > messages_.size())
            all += "\n  ... and " + std::to_string(count_ - messages_.size()) + " more";
        throw ValidationError(all);
    }

private:
    static constexpr std::size_t kMax = 50;
    std::vector<std::string> messages_;
    std::size_t count_ = 0;
};

std::string format_score(double v) {
    const int i = static_cast<int>(v);
    return std::to_string(i);
}

std::optional<double> parse_score(const std::string& cell, const std::string& name,
                                  double lo, double hi, std::size_t row,
                                  RowErrors& errors) {
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        errors.add(row, name + " is not a number: '" + cell + "'");
        return std::nullopt;
    }
    if (v < lo || v > hi) {
        errors.add(row, name + " = " + cell + " outside [" + format_score(lo) +
                       ", " + format_score(hi) + "]");
        return std::nullopt;
    }
    return v;
}

std::vector<std::string> split_pipe(const std::string& cell) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t bar = cell.find('|', start);
        if (bar == std::string::npos) {
            out.push_back(cell.substr(start));
            return out;
        }
        out.push_back(cell.substr(start, bar - start));
        start = bar + 1;
    }
}

} // namespace

std::vector<DrawingRecord> ingest_manifest_content(const std::string& content,
                                                   const std::string& base_dir,
                                                   bool check_files) {
    const auto rows = parse_csv(content);
    if (rows.empty()) throw ValidationError("manifest: empty file");

    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) col[rows[0][i]] = i;
    std::vector<std::string> missing_cols;
    for (const std::string& name : kManifestColumns)
        if (!col.count(name)) missing_cols.push_back(name);
    if (!missing_cols.empty()) {
        std::string msg = "manifest: header lacks column(s):";
        for (const std::string& m : missing_cols) msg += " " + m;
        throw ValidationError(msg);
    }

    RowErrors errors;
    std::vector<DrawingRecord> records;
    std::set<std::string> seen_ids;
    const std::filesystem::path base(base_dir);

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::size_t file_row = r + 1;
        const auto& cells = rows[r];
        if (cells.size() != rows[0].size()) {
            errors.add(file_row, "has " + std::to_string(cells.size()) +
                                     " fields, header has " +
                                     std::to_string(rows[0].size()));
            continue;
        }
        auto cell = [&](const std::string& name) -> const std::string& {
            return cells[col.at(name)];
        };

        DrawingRecord rec;
        rec.drawing_id = cell("drawing_id");
        if (rec.drawing_id.empty()) {
            errors.add(file_row, "empty drawing_id");
            continue;
        }
        if (!seen_ids.insert(rec.drawing_id).second)
            errors.add(file_row, "duplicate drawing_id '" + rec.drawing_id + "'");

        bool labels_ok = true;
        try {
            rec.group = group_from_string(cell("group"));
        } catch (const ValidationError& e) {
            errors.add(file_row, e.what());
            labels_ok = false;
        }
        try {
            rec.subgroup = subgroup_from_string(cell("subgroup"));
        } catch (const ValidationError& e) {
            errors.add(file_row, e.what());
            labels_ok = false;
        }
        if (labels_ok && group_of(rec.subgroup) != rec.group)
            errors.add(file_row, "subgroup '" + cell("subgroup") +
                                     "' inconsistent with group '" + cell("group") + "'");
        try {
            rec.stimulus = stimulus_from_string(cell("stimulus"));
        } catch (const ValidationError& e) {
            errors.add(file_row, e.what());
        }

        rec.participant = cell("participant");
        if (rec.participant.empty()) errors.add(file_row, "empty participant");

        const std::string& inv = cell("inverted");
        if (inv == "0" || inv == "false") rec.inverted = false;
        else if (inv == "1" || inv == "true") rec.inverted = true;
        else errors.add(file_row, "inverted must be 0/1/true/false, got '" + inv + "'");

        if (cell("image_path").empty()) {
            errors.add(file_row, "empty image_path");
        } else {
            std::filesystem::path p(cell("image_path"));
            if (p.is_relative()) p = base / p;
            rec.image_path = p.string();
            if (check_files && !std::filesystem::exists(p))
                errors.add(file_row, "image file not found: " + p.string());
        }

        rec.caption = cell("caption");
        if (!cell("categories").empty()) {
            rec.categories = split_pipe(cell("categories"));
            bool bad = rec.categories.size() > 3;
            for (const std::string& c : rec.categories) bad = bad || c.empty();
            if (bad) {
                errors.add(file_row, "categories must be 1-3 non-empty labels, got '" +
                                         cell("categories") + "'");
                rec.categories.clear();
            }
        }

        rec.expert1 = parse_score(cell("expert1"), "expert1", 0, 4, file_row, errors);
        rec.expert2 = parse_score(cell("expert2"), "expert2", 0, 4, file_row, errors);
        rec.audra = parse_score(cell("audra"), "audra", 0, 1, file_row, errors);
        rec.osc = parse_score(cell("osc"), "osc", 0, 1, file_row, errors);
        rec.used_stim = parse_score(cell("used_stim"), "used_stim", 0, 2, file_row, errors);
        rec.flex1 = parse_score(cell("flex1"), "flex1", 0, 2, file_row, errors);
        rec.flex2 = parse_score(cell("flex2"), "flex2", 0, 2, file_row, errors);

        records.push_back(std::move(rec));
    }

    errors.raise_if_any();
    return records;
}

std::vector<DrawingRecord> ingest_manifest(const std::string& path, bool check_files) {
    const std::filesystem::path p(path);
    return ingest_manifest_content(read_file(path), p.parent_path().string(),
                                   check_files);
}

} // namespace inkscore
