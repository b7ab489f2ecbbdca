#pragma once

#include <string>
#include <vector>

#include "otrisk/io/csv.hpp"

namespace otrisk {

template <typename Scalar = double>
struct RollingWindow {
    std::string label;  // "MM-YYYY"
    Sample<Scalar> sample;
    Date window_start;
    Date window_end;
};

/**
 * Trailing calendar-month windows: the window labeled MM-YYYY covers the
 * window_months consecutive months ending with that month (closed on the
 * month's final day). A label is emitted only when its full window lies
 * inside the data span, so no window exists until window_months of data
 * have accrued; labels advance by step_months.
 */
inline std::vector<RollingWindow<double>> rolling_windows(const TimeSeriesTable& table,
                                                          int window_months, int step_months) {
    if (!table.has_dates())
        throw InvalidArgument("io", "rolling windows need a date column");
    if (window_months < 1 || step_months < 1)
        throw InvalidArgument("io", "window_months and step_months must be >= 1");

    const long first_month = table.dates.front().month_index();
    const Date last_date = table.dates.back();

    std::vector<RollingWindow<double>> windows;
    for (long label_month = first_month + window_months - 1;; label_month += step_months) {
        const Date label = Date::from_month_index(label_month);
        const Date end = label.month_end();
        if (end > last_date) break;
        const Date start = Date::from_month_index(label_month - window_months + 1);

        std::vector<Index> keep;
        for (std::size_t i = 0; i < table.dates.size(); ++i) {
            if (table.dates[i] >= start && table.dates[i] <= end)
                keep.push_back(static_cast<Index>(i));
        }
        if (keep.empty()) continue;
        MatrixX<double> rows(static_cast<Index>(keep.size()), table.d());
        for (std::size_t i = 0; i < keep.size(); ++i) rows.row(static_cast<Index>(i)) = table.values.row(keep[i]);

        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d-%04d", label.month, label.year);
        windows.push_back({buf, Sample<double>(std::move(rows)), start, end});
    }
    return windows;
}

}  // namespace otrisk
