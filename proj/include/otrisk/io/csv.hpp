#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otrisk/common.hpp"

namespace otrisk {

/// Calendar date, ISO-8601 (YYYY-MM-DD) in files.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    friend auto operator<=>(const Date&, const Date&) = default;

    /// Months since year 0, for window arithmetic.
    long month_index() const { return static_cast<long>(year) * 12 + (month - 1); }

    static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static int days_in_month(int y, int m) {
        static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m == 2 && is_leap(y)) return 29;
        return days[m - 1];
    }

    static Date from_month_index(long idx) {
        Date d;
        d.year = static_cast<int>(idx / 12);
        d.month = static_cast<int>(idx % 12) + 1;
        d.day = 1;
        return d;
    }

    Date month_end() const { return {year, month, days_in_month(year, month)}; }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

inline Date parse_date(const std::string& text, long line) {
    Date d;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ParseError("expected ISO date YYYY-MM-DD, got '" + text + "'", line);
    const auto num = [&](int from, int len) {
        int value = 0;
        for (int i = from; i < from + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i])))
                throw ParseError("expected ISO date YYYY-MM-DD, got '" + text + "'", line);
            value = value * 10 + (text[i] - '0');
        }
        return value;
    };
    d.year = num(0, 4);
    d.month = num(5, 2);
    d.day = num(8, 2);
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > Date::days_in_month(d.year, d.month))
        throw ParseError("date out of range: '" + text + "'", line);
    return d;
}

/**
 * Equal-length named real columns, optionally carrying a strictly
 * increasing date column.
 */
struct TimeSeriesTable {
    std::vector<Date> dates;  // empty when no date column
    std::vector<std::string> column_names;
    MatrixX<double> values;  // rows x columns
    std::string name;

    Index n() const { return values.rows(); }
    Index d() const { return values.cols(); }
    bool has_dates() const { return !dates.empty(); }
};

namespace detail {

/// RFC 4180 record reader: quoted fields may contain commas, doubled
/// quotes, and embedded line breaks. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, long& line) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool quoted = false;
    ++line;
    for (;;) {
        if (c == EOF) break;
        if (quoted) {
            if (c == '"') {
                const int peek = in.peek();
                if (peek == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else if (c == '\n') {
            break;
        } else {
            field.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    if (quoted) throw ParseError("unterminated quoted field", line);
    fields.push_back(std::move(field));
    return true;
}

inline double parse_number(const std::string& text, long line, const std::string& column) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
    double value = 0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError("non-numeric value '" + text + "' in column " + column, line);
    return value;
}

}  // namespace detail

/**
 * Load an RFC 4180 CSV with a mandatory header row. When date_column names
 * a header, that column is parsed as ISO dates and the remaining columns
 * become the data matrix; dates must be strictly increasing.
 */
inline TimeSeriesTable load_csv(const std::string& path, const std::string& date_column = "") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("io", "cannot open '" + path + "'");
    TimeSeriesTable table;
    table.name = path;

    long line = 0;
    std::vector<std::string> fields;
    if (!detail::read_csv_record(in, fields, line) || fields.empty() ||
        (fields.size() == 1 && fields[0].empty()))
        throw ParseError("missing header row", 1);

    long date_idx = -1;
    for (std::size_t j = 0; j < fields.size(); ++j) {
        if (!date_column.empty() && fields[j] == date_column) {
            date_idx = static_cast<long>(j);
        } else {
            table.column_names.push_back(fields[j]);
        }
    }
    if (!date_column.empty() && date_idx < 0)
        throw InvalidArgument("io", "date column '" + date_column + "' not found in header");
    const std::size_t n_fields = fields.size();
    const auto d = static_cast<Index>(table.column_names.size());
    if (d < 1) throw ParseError("no data columns in header", 1);

    std::vector<double> flat;
    while (detail::read_csv_record(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != n_fields)
            throw ParseError("ragged row: expected " + std::to_string(n_fields) + " fields, got " +
                                 std::to_string(fields.size()),
                             line);
        Index col = 0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (static_cast<long>(j) == date_idx) {
                table.dates.push_back(parse_date(fields[j], line));
            } else {
                flat.push_back(
                    detail::parse_number(fields[j], line, table.column_names[col]));
                ++col;
            }
        }
    }
    const auto n = static_cast<Index>(flat.size()) / d;
    if (n < 1) throw ParseError("no data rows", line);
    table.values.resize(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) table.values(i, j) = flat[static_cast<std::size_t>(i * d + j)];
    for (std::size_t i = 1; i < table.dates.size(); ++i) {
        if (!(table.dates[i - 1] < table.dates[i]))
            throw InvalidData("io", "dates must be strictly increasing (row " +
                                        std::to_string(i + 1) + ")");
    }
    return table;
}

/// Replace price levels with log-returns log(p_t / p_{t-1}); drops row 0.
inline TimeSeriesTable log_returns(const TimeSeriesTable& table) {
    if (table.n() < 2) throw InvalidArgument("io", "log returns need at least 2 rows");
    if ((table.values.array() <= 0).any())
        throw InvalidData("io", "log returns need strictly positive price levels");
    TimeSeriesTable out;
    out.column_names = table.column_names;
    out.name = table.name;
    out.values = (table.values.bottomRows(table.n() - 1).array().log() -
                  table.values.topRows(table.n() - 1).array().log())
                     .matrix();
    if (table.has_dates())
        out.dates.assign(table.dates.begin() + 1, table.dates.end());
    return out;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const MatrixX<double>& values) {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out << ',';
        out << header[j];
    }
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            if (j) out << ',';
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace otrisk
