#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trendcast/calendar.hpp"
#include "trendcast/errors.hpp"

namespace trendcast {

struct RawObservation {
    Date date;
    double close = 0.0;
};

/// As-ingested close series: strictly increasing unique dates, closes > 0.
struct RawSeries {
    std::string symbol;
    std::vector<RawObservation> observations;
};

struct AlignedRow {
    Date date;
    int ordinal = 0;
    double close = 0.0;
};

/// One row per Monday-Friday date in [start_date, end_date], forward-filled,
/// with ordinal == row position.
struct AlignedSeries {
    std::string symbol;
    Date start_date;
    Date end_date;
    std::vector<AlignedRow> rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) != 0)) s.remove_prefix(1);
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) != 0)) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

} // namespace detail

/// Parse a delimited close-price table. The header must name `Date` and
/// `Close` columns (extra columns ignored). Rows whose close field is empty
/// or non-numeric are dropped; output is sorted ascending by date.
inline RawSeries parse_series(std::istream& text, std::string symbol) {
    std::string line;
    if (!std::getline(text, line))
        throw FormatError("parse_series(" + symbol + "): empty input, no header");
    // Strip a UTF-8 BOM if present.
    if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF')
        line.erase(0, 3);

    const auto header = detail::split_csv_line(line);
    std::ptrdiff_t date_col = -1, close_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (detail::iequals(header[i], "Date")) date_col = static_cast<std::ptrdiff_t>(i);
        else if (detail::iequals(header[i], "Close")) close_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0 || close_col < 0)
        throw FormatError("parse_series(" + symbol +
                          "): header must name Date and Close columns, got '" + line + "'");

    RawSeries series{std::move(symbol), {}};
    std::size_t line_no = 1;
    while (std::getline(text, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (static_cast<std::size_t>(date_col) >= fields.size() ||
            static_cast<std::size_t>(close_col) >= fields.size())
            continue; // short row: no usable close field
        const auto date_text = fields[static_cast<std::size_t>(date_col)];
        const auto close_text = fields[static_cast<std::size_t>(close_col)];
        const auto date = Date::parse_iso(date_text);
        if (!date)
            throw DataError("parse_series(" + series.symbol + "): line " +
                            std::to_string(line_no) + ": bad date '" + std::string(date_text) +
                            "'");
        double close = 0.0;
        const auto [end, ec] =
            std::from_chars(close_text.data(), close_text.data() + close_text.size(), close);
        if (ec != std::errc{} || end != close_text.data() + close_text.size())
            continue; // empty / "null" / non-numeric close: drop the row
        if (!(close > 0.0))
            throw DataError("parse_series(" + series.symbol + "): non-positive close " +
                            std::to_string(close) + " on " + date->to_iso());
        series.observations.push_back({*date, close});
    }
    if (series.observations.empty())
        throw EmptyInputError("parse_series(" + series.symbol + "): zero usable rows");

    std::stable_sort(series.observations.begin(), series.observations.end(),
                     [](const RawObservation& a, const RawObservation& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series.observations.size(); ++i)
        if (series.observations[i].date == series.observations[i - 1].date)
            throw DataError("parse_series(" + series.symbol + "): duplicate date " +
                            series.observations[i].date.to_iso());
    return series;
}

inline RawSeries parse_series(const std::string& text, std::string symbol) {
    std::istringstream in(text);
    return parse_series(in, std::move(symbol));
}

inline RawSeries load_series_file(const std::string& path, std::string symbol) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open fixture file " + path);
    return parse_series(in, std::move(symbol));
}

/// Project a raw series onto the Monday-Friday calendar of [start, end],
/// carrying the most recent prior close into gaps. Backward fill is never
/// performed: an observation at or before the first covered weekday must exist.
inline AlignedSeries align_series(const RawSeries& raw, Date start, Date end) {
    if (start > end) throw DataError("align_series: start date after end date");
    const Date first = first_weekday_on_or_after(start);
    const Date last = last_weekday_on_or_before(end);
    if (first > last) throw DataError("align_series: range contains no weekday");
    if (raw.observations.empty() || raw.observations.front().date > first)
        throw BackfillError("align_series(" + raw.symbol + "): no observation on or before " +
                            first.to_iso());

    AlignedSeries out{raw.symbol, start, end, {}};
    out.rows.reserve(static_cast<std::size_t>(weekday_count(first, last)));
    std::size_t next_obs = 0;
    double carried = 0.0;
    int ordinal = 0;
    for (Date d = first; d <= last; d = next_weekday(d)) {
        while (next_obs < raw.observations.size() && raw.observations[next_obs].date <= d)
            carried = raw.observations[next_obs++].close;
        out.rows.push_back({d, ordinal++, carried});
    }
    return out;
}

struct ClosingsSummary {
    double positive = 0.0;
    double negative = 0.0;
    double zero = 0.0;
};

/// Fractions of day-over-day close changes that are up, down, and flat.
/// Flat days (forward-filled holidays among them) form their own bucket.
inline ClosingsSummary closings_summary(const AlignedSeries& series) {
    if (series.rows.size() < 2)
        throw DataError("closings_summary(" + series.symbol + "): need at least 2 rows");
    long up = 0, down = 0, flat = 0;
    for (std::size_t i = 1; i < series.rows.size(); ++i) {
        const double diff = series.rows[i].close - series.rows[i - 1].close;
        if (diff > 0) ++up;
        else if (diff < 0) ++down;
        else ++flat;
    }
    const double n = static_cast<double>(series.rows.size() - 1);
    return {up / n, down / n, flat / n};
}

/// Contiguous train/test row ranges (half-open) for one backtest cell.
struct SplitSpec {
    int test_year = 0;
    std::size_t train_begin = 0;
    std::size_t train_end = 0; // == test_begin
    std::size_t test_begin = 0;
    std::size_t test_end = 0;
};

/// Train on every row dated before Jan 1 of `test_year`, test on the rows of
/// `test_year` itself. Scaler fitting is the caller's duty and must use train
/// rows only.
inline SplitSpec split_by_test_year(const AlignedSeries& series, int test_year) {
    const Date year_start = jan1(test_year);
    const Date first_test_wd = first_weekday_on_or_after(year_start);
    const Date last_test_wd = last_weekday_on_or_before(dec31(test_year));
    if (series.rows.empty() || series.rows.front().date > first_test_wd ||
        series.rows.back().date < last_test_wd)
        throw CoverageError("split_by_test_year(" + series.symbol + "): series does not cover " +
                            std::to_string(test_year));

    const auto& rows = series.rows;
    const auto lower = std::lower_bound(rows.begin(), rows.end(), year_start,
                                        [](const AlignedRow& r, Date d) { return r.date < d; });
    const auto upper = std::lower_bound(rows.begin(), rows.end(), jan1(test_year + 1),
                                        [](const AlignedRow& r, Date d) { return r.date < d; });
    const std::size_t split_at = static_cast<std::size_t>(lower - rows.begin());
    if (split_at == 0)
        throw InsufficientHistoryError("split_by_test_year(" + series.symbol +
                                       "): no training rows before " + std::to_string(test_year));
    SplitSpec spec;
    spec.test_year = test_year;
    spec.train_begin = 0;
    spec.train_end = split_at;
    spec.test_begin = split_at;
    spec.test_end = static_cast<std::size_t>(upper - rows.begin());
    return spec;
}

} // namespace trendcast
