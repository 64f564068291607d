#include "inkscore/table.hpp"

#include <charconv>
#include <cstdint>

#include "inkscore/csv.hpp"

namespace inkscore {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ValidationError("not a number: '" + text + "'");
    return value;
}

std::size_t MetricsTable::add_row() {
    for (Column& c : columns_) {
        c.present.push_back(0);
        if (c.type == ColumnType::numeric) c.nums.push_back(0.0);
        else c.texts.emplace_back();
    }
    return n_rows_++;
}

void MetricsTable::add_column(const std::string& name, ColumnType type) {
    if (index_.count(name)) throw Error("duplicate column: " + name);
    Column c;
    c.name = name;
    c.type = type;
    c.present.assign(n_rows_, 0);
    if (type == ColumnType::numeric) c.nums.assign(n_rows_, 0.0);
    else c.texts.assign(n_rows_, {});
    index_[name] = columns_.size();
    columns_.push_back(std::move(c));
}

bool MetricsTable::has_column(const std::string& name) const {
    return index_.count(name) > 0;
}

ColumnType MetricsTable::column_type(const std::string& name) const {
    return column(name).type;
}

std::vector<std::string> MetricsTable::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const Column& c : columns_) out.push_back(c.name);
    return out;
}

MetricsTable::Column& MetricsTable::column(const std::string& name) {
    const auto it = index_.find(name);
    if (it == index_.end()) throw Error("no such column: " + name);
    return columns_[it->second];
}

const MetricsTable::Column& MetricsTable::column(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw Error("no such column: " + name);
    return columns_[it->second];
}

MetricsTable::Column& MetricsTable::ensure_column(const std::string& name,
                                                  ColumnType type) {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        add_column(name, type);
        return columns_.back();
    }
    Column& c = columns_[it->second];
    if (c.type != type)
        throw Error("column '" + name + "' is " +
                    (c.type == ColumnType::numeric ? "numeric" : "text") +
                    ", not " + (type == ColumnType::numeric ? "numeric" : "text"));
    return c;
}

void MetricsTable::set_number(std::size_t row, const std::string& col, double value) {
    Column& c = ensure_column(col, ColumnType::numeric);
    if (row >= n_rows_) throw Error("row out of range");
    c.nums[row] = value;
    c.present[row] = 1;
}

void MetricsTable::set_text(std::size_t row, const std::string& col, std::string value) {
    Column& c = ensure_column(col, ColumnType::text);
    if (row >= n_rows_) throw Error("row out of range");
    c.texts[row] = std::move(value);
    c.present[row] = 1;
}

void MetricsTable::clear_cell(std::size_t row, const std::string& col) {
    Column& c = column(col);
    if (row >= n_rows_) throw Error("row out of range");
    c.present[row] = 0;
    if (c.type == ColumnType::numeric) c.nums[row] = 0.0;
    else c.texts[row].clear();
}

bool MetricsTable::present(std::size_t row, const std::string& col) const {
    const Column& c = column(col);
    if (row >= n_rows_) throw Error("row out of range");
    return c.present[row] != 0;
}

double MetricsTable::number(std::size_t row, const std::string& col) const {
    const Column& c = column(col);
    if (c.type != ColumnType::numeric)
        throw Error("column '" + col + "' is not numeric");
    if (row >= n_rows_) throw Error("row out of range");
    if (!c.present[row]) throw Error("missing value at row " +
                                     std::to_string(row) + ", column '" + col + "'");
    return c.nums[row];
}

const std::string& MetricsTable::text(std::size_t row, const std::string& col) const {
    const Column& c = column(col);
    if (c.type != ColumnType::text)
        throw Error("column '" + col + "' is not text");
    if (row >= n_rows_) throw Error("row out of range");
    if (!c.present[row]) throw Error("missing value at row " +
                                     std::to_string(row) + ", column '" + col + "'");
    return c.texts[row];
}

std::optional<double> MetricsTable::maybe_number(std::size_t row,
                                                 const std::string& col) const {
    const Column& c = column(col);
    if (c.type != ColumnType::numeric)
        throw Error("column '" + col + "' is not numeric");
    if (row >= n_rows_) throw Error("row out of range");
    if (!c.present[row]) return std::nullopt;
    return c.nums[row];
}

std::string MetricsTable::to_csv() const {
    std::string out;
    std::vector<std::string> fields;
    fields.reserve(columns_.size());
    for (const Column& c : columns_) fields.push_back(c.name);
    out += csv_join(fields);
    out += '\n';
    for (std::size_t r = 0; r < n_rows_; ++r) {
        fields.clear();
        for (const Column& c : columns_) {
            if (!c.present[r]) fields.emplace_back();
            else if (c.type == ColumnType::numeric)
                fields.push_back(format_double(c.nums[r]));
            else fields.push_back(c.texts[r]);
        }
        out += csv_join(fields);
        out += '\n';
    }
    return out;
}

MetricsTable MetricsTable::from_csv(const std::string& content,
                                    const std::set<std::string>& text_columns) {
    const auto rows = parse_csv(content);
    if (rows.empty()) throw ValidationError("csv: no header row");
    const std::vector<std::string>& header = rows[0];

    MetricsTable table;
    const std::size_t n_cols = header.size();
    const std::size_t n_data = rows.size() - 1;

    for (std::size_t r = 1; r < rows.size(); ++r)
        if (rows[r].size() != n_cols)
            throw ValidationError("csv: row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) +
                                  " fields, expected " + std::to_string(n_cols));

    // Decide a type per column: forced text, or numeric when every non-empty
    // cell parses as a double.
    std::vector<ColumnType> types(n_cols, ColumnType::numeric);
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (text_columns.count(header[c])) {
            types[c] = ColumnType::text;
            continue;
        }
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const std::string& cell = rows[r][c];
            if (cell.empty()) continue;
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
                types[c] = ColumnType::text;
                break;
            }
        }
    }

    for (std::size_t c = 0; c < n_cols; ++c) table.add_column(header[c], types[c]);
    for (std::size_t r = 0; r < n_data; ++r) table.add_row();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            const std::string& cell = rows[r][c];
            if (cell.empty()) continue;
            if (types[c] == ColumnType::numeric)
                table.set_number(r - 1, header[c], parse_double(cell));
            else
                table.set_text(r - 1, header[c], cell);
        }
    }
    return table;
}

void MetricsTable::save_csv(const std::string& path) const {
    write_file(path, to_csv());
}

MetricsTable MetricsTable::load_csv(const std::string& path,
                                    const std::set<std::string>& text_columns) {
    return from_csv(read_file(path), text_columns);
}

} // namespace inkscore
