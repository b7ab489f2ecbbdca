#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "otrisk/io/csv.hpp"
#include "otrisk/io/fit_archive.hpp"
#include "otrisk/io/rolling.hpp"
#include "otrisk/pipeline.hpp"
#include "otrisk/simulate.hpp"

using namespace otrisk;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
    void write(const std::string& contents) const {
        std::ofstream out(path, std::ios::binary);
        out << contents;
    }
};

}  // namespace

TEST_CASE("csv: plain numeric table") {
    TempFile file("otrisk_plain.csv");
    std::string body = "a,b\n";
    for (int i = 0; i < 10; ++i) body += std::to_string(i) + "," + std::to_string(2 * i) + "\n";
    file.write(body);
    const auto table = load_csv(file.path);
    CHECK(table.n() == 10);
    CHECK(table.d() == 2);
    CHECK_FALSE(table.has_dates());
    CHECK(table.values(3, 1) == 6.0);
    CHECK(table.column_names[0] == "a");
}

TEST_CASE("csv: date column, quoting, crlf") {
    TempFile file("otrisk_dates.csv");
    file.write("Date,\"price,USD\",q\r\n2005-01-03,1.5,2\r\n2005-01-04,1.75,\"3\"\r\n");
    const auto table = load_csv(file.path, "Date");
    CHECK(table.d() == 2);
    CHECK(table.column_names[0] == "price,USD");
    REQUIRE(table.has_dates());
    CHECK(table.dates[0] == Date{2005, 1, 3});
    CHECK(table.values(1, 1) == 3.0);
}

TEST_CASE("csv: error paths carry line numbers") {
    TempFile file("otrisk_bad.csv");

    file.write("a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(load_csv(file.path), doctest::Contains("line 3"), ParseError);

    file.write("a,b\n1,x\n");
    CHECK_THROWS_AS(load_csv(file.path), ParseError);

    file.write("");
    CHECK_THROWS_AS(load_csv(file.path), ParseError);

    file.write("Date,a\n2005-13-01,1\n");
    CHECK_THROWS_AS(load_csv(file.path, "Date"), ParseError);

    file.write("Date,a\n2005-01-02,1\n2005-01-02,2\n");
    CHECK_THROWS_AS(load_csv(file.path, "Date"), InvalidData);

    file.write("Date,a\n2005-01-02,1\n");
    CHECK_THROWS_AS(load_csv(file.path, "Missing"), InvalidArgument);
}

TEST_CASE("log returns") {
    TempFile file("otrisk_prices.csv");
    file.write("Date,p\n2005-01-01,100\n2005-01-02,110\n2005-01-03,99\n");
    const auto prices = load_csv(file.path, "Date");
    const auto returns = log_returns(prices);
    CHECK(returns.n() == 2);
    CHECK(returns.values(0, 0) == doctest::Approx(std::log(1.1)));
    CHECK(returns.dates.front() == Date{2005, 1, 2});

    TimeSeriesTable negative = prices;
    negative.values(1, 0) = -3.0;
    CHECK_THROWS_AS(log_returns(negative), InvalidData);
}

TEST_CASE("rolling windows: end-anchored monthly labels") {
    TimeSeriesTable table;
    table.column_names = {"x", "y"};
    std::vector<Date> dates;
    // Daily rows from 2005-01-01 through 2007-12-31.
    for (int y = 2005; y <= 2007; ++y)
        for (int m = 1; m <= 12; ++m)
            for (int day = 1; day <= Date::days_in_month(y, m); ++day)
                dates.push_back({y, m, day});
    table.dates = dates;
    table.values = MatrixX<double>::Random(static_cast<Index>(dates.size()), 2);

    const auto windows = rolling_windows(table, 36, 1);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].label == "12-2007");
    CHECK(windows[0].sample.n() == table.n());

    // A window wider than the span produces nothing.
    CHECK(rolling_windows(table, 48, 1).empty());

    // Monthly steps over a trailing 12-month window.
    const auto monthly = rolling_windows(table, 12, 1);
    REQUIRE(monthly.size() == 25);
    CHECK(monthly.front().label == "12-2005");
    CHECK(monthly.back().label == "12-2007");
    const auto annual = rolling_windows(table, 12, 12);
    REQUIRE(annual.size() == 3);
    CHECK(annual[1].label == "12-2006");

    TimeSeriesTable no_dates = table;
    no_dates.dates.clear();
    CHECK_THROWS_AS(rolling_windows(no_dates, 12, 1), InvalidArgument);
}

TEST_CASE("rolling windows: partial final month is not labeled") {
    TimeSeriesTable table;
    table.column_names = {"x"};
    std::vector<Date> dates;
    for (int m = 1; m <= 12; ++m)
        for (int day = 1; day <= Date::days_in_month(2018, m); ++day)
            dates.push_back({2018, m, day});
    dates.push_back({2019, 1, 1});  // lone day of an unfinished month
    table.dates = dates;
    table.values = MatrixX<double>::Random(static_cast<Index>(dates.size()), 1);
    const auto windows = rolling_windows(table, 6, 1);
    CHECK(windows.back().label == "12-2018");
}

TEST_CASE("fit archive: bit-exact round trip") {
    FitOptions<double> options;
    options.m = 3;
    options.seed = 15;
    const auto fit = build_fit(sample_gaussian(50, 2, 16), options);

    TempFile file("otrisk_fit.json");
    save_fit(fit, file.path, {"fit --n 50", "fnv1a:0"});
    const auto loaded = load_fit(file.path);

    CHECK(loaded.n() == fit.n());
    CHECK(loaded.m == fit.m);
    CHECK(loaded.grid_seeds == fit.grid_seeds);
    CHECK(loaded.xi_log == fit.xi_log);
    CHECK(loaded.delta == fit.delta);
    CHECK(loaded.grid_points == fit.grid_points);
    CHECK(loaded.observations == fit.observations);

    Rng rng(77);
    for (int t = 0; t < 100; ++t) {
        VectorX<double> u(2);
        u << 0.95 * (2 * rng.uniform() - 1), 0.95 * (2 * rng.uniform() - 1);
        if (u.norm() >= 1) continue;
        CHECK(smoothed_potential(fit, u) == smoothed_potential(loaded, u));
        CHECK(smoothed_quantile(fit, u) == smoothed_quantile(loaded, u));
    }
}

TEST_CASE("fit archive: malformed input") {
    TempFile file("otrisk_fit_bad.json");
    file.write("{\"format_version\": 999}");
    CHECK_THROWS_AS(load_fit(file.path), InvalidData);
    file.write("not json at all");
    CHECK_THROWS_AS(load_fit(file.path), InvalidData);
}

TEST_CASE("file digest is stable") {
    TempFile file("otrisk_digest.txt");
    file.write("hello");
    const auto a = file_digest(file.path);
    const auto b = file_digest(file.path);
    CHECK(a == b);
    CHECK(a.substr(0, 6) == "fnv1a:");
    file.write("hello!");
    CHECK(file_digest(file.path) != a);
}
