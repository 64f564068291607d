#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "inkscore/errors.hpp"

namespace inkscore {

enum class ColumnType { numeric, text };

// Column-oriented table of per-drawing metrics. Every cell may be missing;
// numeric cells round-trip losslessly through CSV (shortest representation
// that parses back to the same double).
class MetricsTable {
public:
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return columns_.size(); }

    std::size_t add_row();
    void add_column(const std::string& name, ColumnType type);
    bool has_column(const std::string& name) const;
    ColumnType column_type(const std::string& name) const;
    std::vector<std::string> column_names() const;  // insertion order

    // Setters create the column on first use.
    void set_number(std::size_t row, const std::string& col, double value);
    void set_text(std::size_t row, const std::string& col, std::string value);
    void clear_cell(std::size_t row, const std::string& col);

    bool present(std::size_t row, const std::string& col) const;
    double number(std::size_t row, const std::string& col) const;
    const std::string& text(std::size_t row, const std::string& col) const;
    std::optional<double> maybe_number(std::size_t row, const std::string& col) const;

    std::string to_csv() const;
    // Columns named in `text_columns` stay text even when every value looks
    // numeric (ids, labels); anything else is numeric if all cells parse.
    static MetricsTable from_csv(const std::string& content,
                                 const std::set<std::string>& text_columns = {});

    void save_csv(const std::string& path) const;
    static MetricsTable load_csv(const std::string& path,
                                 const std::set<std::string>& text_columns = {});

private:
    struct Column {
        std::string name;
        ColumnType type = ColumnType::numeric;
        std::vector<double> nums;
        std::vector<std::string> texts;
        std::vector<std::uint8_t> present;
    };

    Column& column(const std::string& name);
    const Column& column(const std::string& name) const;
    Column& ensure_column(const std::string& name, ColumnType type);

    std::vector<Column> columns_;
    std::map<std::string, std::size_t> index_;
    std::size_t n_rows_ = 0;
};

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);
double parse_double(const std::string& text);  // throws on trailing junk

} // namespace inkscore
