// otrisk: center-outward transport quantiles and multivariate risk measures.
//
// Subcommands: simulate | fit | risk | contours | volumes | evi | rolling | qq
// Every command reads flags (environment variables OTRISK_* as fallback),
// writes CSV/JSON into --out-dir, exits 0 on success and nonzero with a
// machine-readable error record on stderr otherwise.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "otrisk/extreme_tails.hpp"
#include "otrisk/io/csv.hpp"
#include "otrisk/io/fit_archive.hpp"
#include "otrisk/io/rolling.hpp"
#include "otrisk/pipeline.hpp"
#include "otrisk/risk.hpp"
#include "otrisk/simulate.hpp"
#include "otrisk/volumes.hpp"

namespace {

using json = nlohmann::json;
using namespace otrisk;

constexpr const char* tool_version = "0.1.0";

struct CommonOptions {
    std::string out_dir = ".";
    int threads = 1;
    bool sequential = false;

    int effective_threads() const { return sequential ? 1 : threads; }
};

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--out-dir", common.out_dir, "Output directory")
        ->envname("OTRISK_OUT_DIR")
        ->capture_default_str();
    cmd->add_option("--threads", common.threads, "Worker threads")
        ->envname("OTRISK_THREADS")
        ->capture_default_str();
    cmd->add_flag("--sequential", common.sequential,
                  "Force single-threaded, bit-reproducible execution");
}

std::filesystem::path out_path(const CommonOptions& common, const std::string& name) {
    std::filesystem::create_directories(common.out_dir);
    return std::filesystem::path(common.out_dir) / name;
}

void write_json(const std::filesystem::path& path, const json& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("io", "cannot write '" + path.string() + "'");
    out << payload.dump(1) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("io", "cannot write '" + path.string() + "'");
    out << text;
}

std::string join_args(int argc, char** argv) {
    std::string joined;
    for (int i = 0; i < argc; ++i) {
        if (i) joined += ' ';
        joined += argv[i];
    }
    return joined;
}

// ---------------------------------------------------------------------------
// Distribution selection shared by `simulate` and `fit`.

struct DistOptions {
    std::string dist = "gaussian";
    Index n = 1000;
    Index d = 2;
    double nu = 3.0;
    double gamma_par = 1.0 / 3.0;
    double sigma_offdiag = 0.0;
    std::uint64_t seed = 0;
};

void add_dist(CLI::App* cmd, DistOptions& dist) {
    cmd->add_option("--dist", dist.dist, "Distribution: gaussian | t | hyperbolic")
        ->envname("OTRISK_DIST")
        ->capture_default_str();
    cmd->add_option("--n", dist.n, "Sample size")->capture_default_str();
    cmd->add_option("--d", dist.d, "Dimension")->capture_default_str();
    cmd->add_option("--nu", dist.nu, "Student-t degrees of freedom")->capture_default_str();
    cmd->add_option("--gamma", dist.gamma_par, "Hyperbolic extreme value index")
        ->capture_default_str();
    cmd->add_option("--sigma-offdiag", dist.sigma_offdiag,
                    "Equicorrelation off-diagonal (hyperbolic defaults to 0.5)")
        ->capture_default_str();
    cmd->add_option("--seed", dist.seed, "RNG seed")->envname("OTRISK_SEED")->capture_default_str();
}

Sample<double> draw_sample(const DistOptions& dist) {
    if (dist.dist == "gaussian") {
        if (dist.sigma_offdiag != 0.0) {
            auto spec = EllipticalSpec<double>::gaussian(dist.d);
            spec.sigma = equicorrelation_matrix<double>(dist.d, dist.sigma_offdiag);
            return sample_gaussian(dist.n, dist.d, spec, dist.seed);
        }
        return sample_gaussian(dist.n, dist.d, dist.seed);
    }
    if (dist.dist == "t") {
        MatrixX<double> sigma = dist.sigma_offdiag != 0.0
                                    ? equicorrelation_matrix<double>(dist.d, dist.sigma_offdiag)
                                    : MatrixX<double>::Identity(dist.d, dist.d);
        return sample_student_t(dist.n, dist.d, dist.nu, sigma, dist.seed);
    }
    if (dist.dist == "hyperbolic") {
        const double off = dist.sigma_offdiag != 0.0 ? dist.sigma_offdiag : 0.5;
        return sample_hyperbolic(dist.n, dist.d, dist.gamma_par,
                                 equicorrelation_matrix<double>(dist.d, off), dist.seed);
    }
    throw InvalidArgument("cli", "unknown --dist '" + dist.dist + "'");
}

// ---------------------------------------------------------------------------
// Smoothing configuration shared by fit and the evaluation commands.

struct XiOptions {
    std::string policy = "moderate";  // moderate | sharp
    std::optional<double> xi_log;
};

void add_xi(CLI::App* cmd, XiOptions& xi) {
    cmd->add_option("--xi-policy", xi.policy,
                    "Smoothing policy: moderate ((log n)^2) | sharp (ln xi = 300)")
        ->envname("OTRISK_XI_POLICY")
        ->capture_default_str();
    cmd->add_option("--xi-log", xi.xi_log, "Explicit ln(xi), overrides --xi-policy");
}

void apply_xi(const XiOptions& xi, FitOptions<double>& options) {
    if (xi.xi_log) {
        options.xi_mode = XiMode::Explicit;
        options.xi_log = *xi.xi_log;
    } else if (xi.policy == "sharp") {
        options.xi_mode = XiMode::Sharp;
    } else if (xi.policy == "moderate") {
        options.xi_mode = XiMode::Moderate;
    } else {
        throw InvalidArgument("cli", "unknown --xi-policy '" + xi.policy + "'");
    }
}

/// Evaluation commands may re-smooth an archived fit in memory.
void override_xi(const XiOptions& xi, CenterOutwardFit<double>& fit) {
    if (xi.xi_log)
        fit.xi_log = *xi.xi_log;
    else if (xi.policy == "sharp")
        fit.xi_log = sharp_xi_log;
    // "moderate" without --xi-log keeps the archived value.
}

json metadata_block(const std::string& command_line) {
    return json{{"tool", "otrisk"}, {"version", tool_version}, {"command_line", command_line}};
}

std::string format_csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Subcommand payloads.

int run_simulate(const DistOptions& dist, const CommonOptions& common) {
    const auto sample = draw_sample(dist);
    std::ostringstream body;
    std::vector<std::string> header;
    for (Index j = 0; j < sample.d(); ++j) header.push_back("x" + std::to_string(j + 1));
    write_csv(body, header, sample.rows);
    write_text(out_path(common, "sample.csv"), body.str());
    return 0;
}

struct FitFileOptions {
    std::string input;
    std::string date_column;
    bool take_log_returns = false;
};

int run_fit(const DistOptions& dist, const FitFileOptions& file, Index m, const XiOptions& xi,
            const CommonOptions& common, const std::string& command_line) {
    std::optional<Sample<double>> sample;
    std::string digest;
    if (!file.input.empty()) {
        auto table = load_csv(file.input, file.date_column);
        if (file.take_log_returns) table = log_returns(table);
        sample.emplace(table.values);
        digest = file_digest(file.input);
    } else {
        sample.emplace(draw_sample(dist));
    }
    FitOptions<double> options;
    options.m = m;
    options.seed = dist.seed;
    options.threads = common.effective_threads();
    apply_xi(xi, options);
    const auto fit = build_fit(*sample, options);
    save_fit(fit, out_path(common, "fit.json").string(), {command_line, digest});
    return 0;
}

int run_risk(const std::string& fit_path, double p, const XiOptions& xi, bool emit_surface,
             const CommonOptions& common, const std::string& command_line) {
    auto fit = load_fit(fit_path);
    override_xi(xi, fit);
    const auto report = risk_report(fit, p);
    json payload;
    payload["rho"] = report.rho;
    payload["p"] = report.p;
    payload["rho_tail"] = report.rho_tail;
    payload["rho_trimmed"] = report.rho_trimmed;
    payload["n_tail"] = report.n_tail;
    payload["n"] = report.n;
    payload["metadata"] = metadata_block(command_line);
    payload["metadata"]["xi_log"] = fit.xi_log;
    payload["metadata"]["m"] = fit.m;
    write_json(out_path(common, "risk.json"), payload);

    if (emit_surface) {
        const VectorX<double> heights = risk_surface(fit, fit.grid_points);
        MatrixX<double> table(fit.n(), fit.d() + 1);
        table.leftCols(fit.d()) = fit.grid_points;
        table.col(fit.d()) = heights;
        std::vector<std::string> header;
        for (Index j = 0; j < fit.d(); ++j) header.push_back("u" + std::to_string(j + 1));
        header.push_back("height");
        std::ostringstream body;
        write_csv(body, header, table);
        write_text(out_path(common, "surface.csv"), body.str());
    }
    return 0;
}

int run_contours(const std::string& fit_path, std::vector<double> orders, Index n_points,
                 Index sign_directions, const XiOptions& xi, std::uint64_t seed,
                 const CommonOptions& common) {
    auto fit = load_fit(fit_path);
    override_xi(xi, fit);
    if (orders.empty()) orders = {0.25, 0.5, 0.75};

    std::ostringstream body;
    body << "p,vertex";
    for (Index j = 0; j < fit.d(); ++j) body << ",x" << (j + 1);
    body << '\n';
    for (const double p : orders) {
        const auto contour = quantile_contour(fit, p, n_points, seed);
        for (Index r = 0; r < contour.rows(); ++r) {
            body << format_csv_double(p) << ',' << r;
            for (Index j = 0; j < fit.d(); ++j) body << ',' << format_csv_double(contour(r, j));
            body << '\n';
        }
    }
    write_text(out_path(common, "contours.csv"), body.str());

    if (sign_directions > 0) {
        std::ostringstream sc;
        sc << "direction,step";
        for (Index j = 0; j < fit.d(); ++j) sc << ",x" << (j + 1);
        sc << '\n';
        Rng rng(seed, 0x51);
        for (Index s = 0; s < sign_directions; ++s) {
            VectorX<double> dir(fit.d());
            if (fit.d() == 2) {
                const double a =
                    2.0 * M_PI * static_cast<double>(s) / static_cast<double>(sign_directions);
                dir << std::cos(a), std::sin(a);
            } else {
                for (Index j = 0; j < fit.d(); ++j) dir(j) = rng.normal();
            }
            const auto curve = sign_curve(fit, dir, n_points);
            for (Index r = 0; r < curve.rows(); ++r) {
                sc << s << ',' << r;
                for (Index j = 0; j < fit.d(); ++j) sc << ',' << format_csv_double(curve(r, j));
                sc << '\n';
            }
        }
        write_text(out_path(common, "sign_curves.csv"), sc.str());
    }
    return 0;
}

int run_volumes(const std::string& fit_path, std::vector<double> orders,
                const std::string& reference, const XiOptions& xi, const CommonOptions& common,
                const std::string& command_line) {
    auto fit = load_fit(fit_path);
    override_xi(xi, fit);
    if (orders.empty())
        for (int i = 1; i <= 9; ++i) orders.push_back(0.1 * i);

    const auto curve = empirical_volume_curve(fit, orders);
    std::ostringstream body;
    body << "p,volume,stderr\n";
    for (std::size_t i = 0; i < curve.orders.size(); ++i) {
        body << format_csv_double(curve.orders[i]) << ',' << format_csv_double(curve.volumes[i])
             << ',';
        if (i < curve.std_errors.size()) body << format_csv_double(curve.std_errors[i]);
        body << '\n';
    }
    write_text(out_path(common, "volumes.csv"), body.str());

    json payload;
    payload["orders"] = curve.orders;
    payload["volumes"] = curve.volumes;
    payload["method"] = curve.method == VolumeMethod::MonteCarlo ? "monte_carlo" : "quadrature";
    if (!curve.std_errors.empty()) payload["std_errors"] = curve.std_errors;
    payload["metadata"] = metadata_block(command_line);
    payload["metadata"]["xi_log"] = fit.xi_log;
    write_json(out_path(common, "volumes.json"), payload);

    if (!reference.empty() && reference != "none") {
        VolumeReference kind;
        if (reference == "gaussian")
            kind = VolumeReference::GaussianChiSq;
        else if (reference == "log-pareto")
            kind = VolumeReference::LogPareto;
        else
            throw InvalidArgument("cli", "unknown --reference '" + reference + "'");
        const auto qq = volume_qq_data(fit, kind, orders);
        std::ostringstream qq_body;
        qq_body << "reference,empirical\n";
        for (std::size_t i = 0; i < qq.reference.size(); ++i)
            qq_body << format_csv_double(qq.reference[i]) << ','
                    << format_csv_double(qq.empirical[i]) << '\n';
        write_text(out_path(common, "volume_qq.csv"), qq_body.str());
    }
    return 0;
}

int run_evi(const std::string& fit_path, Index k_max, double tau, double rho2, bool smoothed,
            const XiOptions& xi, const CommonOptions& common, const std::string& command_line) {
    auto fit = load_fit(fit_path);
    override_xi(xi, fit);
    const auto series = y_values(fit, smoothed);
    const auto curves = evi_curves(series, k_max, tau, rho2);

    std::ostringstream body;
    body << "k,hill,ls,ridge\n";
    for (std::size_t i = 0; i < curves.ks.size(); ++i)
        body << curves.ks[i] << ',' << format_csv_double(curves.hill[i]) << ','
             << format_csv_double(curves.ls[i]) << ',' << format_csv_double(curves.ridge[i])
             << '\n';
    write_text(out_path(common, "evi.csv"), body.str());

    json payload;
    payload["tau"] = curves.tau;
    payload["second_order_rho"] = curves.second_order_rho;
    payload["dropped_nonpositive"] = curves.dropped;
    payload["smoothed"] = smoothed;
    payload["k_max"] = k_max;
    payload["metadata"] = metadata_block(command_line);
    payload["metadata"]["xi_log"] = fit.xi_log;
    write_json(out_path(common, "evi.json"), payload);
    return 0;
}

int run_qq(const std::string& fit_path, bool smoothed, const XiOptions& xi,
           const CommonOptions& common, const std::string& command_line) {
    auto fit = load_fit(fit_path);
    override_xi(xi, fit);
    const auto series = y_values(fit, smoothed);
    const auto qq = pareto_qq_data(series);

    std::ostringstream body;
    body << "log_exponential_quantile,log_order_statistic\n";
    for (std::size_t i = 0; i < qq.log_order_statistic.size(); ++i)
        body << format_csv_double(qq.log_exponential_quantile[i]) << ','
             << format_csv_double(qq.log_order_statistic[i]) << '\n';
    write_text(out_path(common, "pareto_qq.csv"), body.str());

    json payload;
    payload["dropped_nonpositive"] = qq.dropped;
    payload["smoothed"] = smoothed;
    payload["points"] = qq.log_order_statistic.size();
    payload["metadata"] = metadata_block(command_line);
    write_json(out_path(common, "pareto_qq.json"), payload);
    return 0;
}

struct RollingReport {
    std::string label;
    Index n = 0;
    double rho = 0, rho_tail = 0, rho_trimmed = 0;
    Index n_tail = 0;
    double hill = 0, ls = 0, ridge = 0;
    Index k = 0;
    Index dropped = 0;
};

int run_rolling(const FitFileOptions& file, int window_months, int step_months, Index m,
                std::uint64_t seed, double p, Index k_opt, double tau, double rho2,
                const XiOptions& xi, const CommonOptions& common,
                const std::string& command_line) {
    if (file.input.empty()) throw InvalidArgument("cli", "rolling needs --input");
    auto table = load_csv(file.input, file.date_column.empty() ? "Date" : file.date_column);
    if (file.take_log_returns) table = log_returns(table);
    const auto windows = rolling_windows(table, window_months, step_months);
    if (windows.empty())
        throw InvalidArgument("io", "no complete window of " + std::to_string(window_months) +
                                        " months in the input span");

    const auto process = [&](std::size_t idx) {
        const auto& window = windows[idx];
        FitOptions<double> options;
        options.m = m;
        // Every window gets its own deterministic stream, independent of
        // scheduling order.
        options.seed = Rng::derive_seed(seed, idx);
        apply_xi(xi, options);
        const auto fit = build_fit(window.sample, options);
        const auto report = risk_report(fit, p);
        RollingReport row;
        row.label = window.label;
        row.n = report.n;
        row.rho = report.rho;
        row.rho_tail = report.rho_tail;
        row.rho_trimmed = report.rho_trimmed;
        row.n_tail = report.n_tail;
        const auto series = y_values(fit, false);
        const Index k = std::min<Index>(k_opt > 0 ? k_opt : 100, series.n() - 1);
        const auto curves = evi_curves(series, k, tau, rho2);
        row.k = curves.ks.back();
        row.hill = curves.hill.back();
        row.ls = curves.ls.back();
        row.ridge = curves.ridge.back();
        row.dropped = curves.dropped;
        return row;
    };

    std::vector<RollingReport> rows(windows.size());
    const int threads = common.effective_threads();
    if (threads > 1) {
        std::vector<std::future<RollingReport>> jobs(windows.size());
        std::size_t next = 0;
        while (next < windows.size()) {
            const std::size_t burst =
                std::min<std::size_t>(static_cast<std::size_t>(threads), windows.size() - next);
            for (std::size_t t = 0; t < burst; ++t)
                jobs[next + t] =
                    std::async(std::launch::async, [&, idx = next + t] { return process(idx); });
            for (std::size_t t = 0; t < burst; ++t) rows[next + t] = jobs[next + t].get();
            next += burst;
        }
    } else {
        for (std::size_t idx = 0; idx < windows.size(); ++idx) rows[idx] = process(idx);
    }

    std::ostringstream body;
    body << "label,n,rho,rho_tail,rho_trimmed,n_tail,k,hill,ls,ridge,dropped\n";
    json report_rows = json::array();
    for (const auto& row : rows) {
        body << row.label << ',' << row.n << ',' << format_csv_double(row.rho) << ','
             << format_csv_double(row.rho_tail) << ',' << format_csv_double(row.rho_trimmed)
             << ',' << row.n_tail << ',' << row.k << ',' << format_csv_double(row.hill) << ','
             << format_csv_double(row.ls) << ',' << format_csv_double(row.ridge) << ','
             << row.dropped << '\n';
        report_rows.push_back({{"label", row.label},
                               {"n", row.n},
                               {"rho", row.rho},
                               {"rho_tail", row.rho_tail},
                               {"rho_trimmed", row.rho_trimmed},
                               {"n_tail", row.n_tail},
                               {"k", row.k},
                               {"hill", row.hill},
                               {"ls", row.ls},
                               {"ridge", row.ridge},
                               {"dropped", row.dropped}});
    }
    write_text(out_path(common, "rolling.csv"), body.str());
    json payload;
    payload["windows"] = std::move(report_rows);
    payload["p"] = p;
    payload["m"] = m;
    payload["seed"] = seed;
    payload["window_months"] = window_months;
    payload["step_months"] = step_months;
    payload["metadata"] = metadata_block(command_line);
    write_json(out_path(common, "rolling.json"), payload);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Center-outward transport quantiles and multivariate risk measures"};
    app.require_subcommand(1);
    const std::string command_line = join_args(argc, argv);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw a benchmark sample and write sample.csv");
    DistOptions sim_dist;
    CommonOptions sim_common;
    add_dist(sim, sim_dist);
    add_common(sim, sim_common);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Estimate a center-outward fit and write fit.json");
    DistOptions fit_dist;
    CommonOptions fit_common;
    FitFileOptions fit_file;
    XiOptions fit_xi;
    Index fit_m = 10;
    add_dist(fit_cmd, fit_dist);
    add_common(fit_cmd, fit_common);
    add_xi(fit_cmd, fit_xi);
    fit_cmd->add_option("--m", fit_m, "Number of averaged replication grids")
        ->envname("OTRISK_M")
        ->capture_default_str();
    fit_cmd->add_option("--input", fit_file.input, "CSV input (otherwise simulate per --dist)");
    fit_cmd->add_option("--date-column", fit_file.date_column, "Name of the date column");
    fit_cmd->add_flag("--log-returns", fit_file.take_log_returns,
                      "Transform price levels to log-returns");

    // risk
    auto* risk_cmd = app.add_subcommand("risk", "Risk measures of an archived fit");
    CommonOptions risk_common;
    XiOptions risk_xi;
    std::string risk_fit = "fit.json";
    double risk_p = 0.05;
    bool risk_surface_flag = false;
    risk_cmd->add_option("--fit", risk_fit, "Fit archive")->capture_default_str();
    risk_cmd->add_option("--p", risk_p, "Tail order")->envname("OTRISK_P")->capture_default_str();
    risk_cmd->add_flag("--surface", risk_surface_flag, "Also write surface.csv heights");
    add_xi(risk_cmd, risk_xi);
    add_common(risk_cmd, risk_common);

    // contours
    auto* cont_cmd = app.add_subcommand("contours", "Quantile contours and sign curves");
    CommonOptions cont_common;
    XiOptions cont_xi;
    std::string cont_fit = "fit.json";
    std::vector<double> cont_orders;
    Index cont_points = 256;
    Index cont_signs = 0;
    std::uint64_t cont_seed = 0;
    cont_cmd->add_option("--fit", cont_fit, "Fit archive")->capture_default_str();
    cont_cmd->add_option("--p", cont_orders, "Contour orders (repeatable)");
    cont_cmd->add_option("--points", cont_points, "Vertices per contour")->capture_default_str();
    cont_cmd->add_option("--sign-directions", cont_signs, "Also emit this many sign curves");
    cont_cmd->add_option("--seed", cont_seed, "Direction seed (d >= 3)")->envname("OTRISK_SEED");
    add_xi(cont_cmd, cont_xi);
    add_common(cont_cmd, cont_common);

    // volumes
    auto* vol_cmd = app.add_subcommand("volumes", "Quantile-region volume curve");
    CommonOptions vol_common;
    XiOptions vol_xi;
    std::string vol_fit = "fit.json";
    std::vector<double> vol_orders;
    std::string vol_reference = "none";
    vol_cmd->add_option("--fit", vol_fit, "Fit archive")->capture_default_str();
    vol_cmd->add_option("--orders", vol_orders, "Volume orders (repeatable)");
    vol_cmd->add_option("--reference", vol_reference, "QQ reference: none | gaussian | log-pareto")
        ->capture_default_str();
    add_xi(vol_cmd, vol_xi);
    add_common(vol_cmd, vol_common);

    // evi
    auto* evi_cmd = app.add_subcommand("evi", "Extreme value index estimator curves");
    CommonOptions evi_common;
    XiOptions evi_xi;
    std::string evi_fit = "fit.json";
    Index evi_kmax = 200;
    double evi_tau = 0.0;
    double evi_rho2 = -1.0;
    bool evi_smoothed = false;
    evi_cmd->add_option("--fit", evi_fit, "Fit archive")->capture_default_str();
    evi_cmd->add_option("--k-max", evi_kmax, "Largest k")
        ->envname("OTRISK_K_MAX")
        ->capture_default_str();
    evi_cmd->add_option("--tau", evi_tau, "Ridge parameter")
        ->envname("OTRISK_TAU")
        ->capture_default_str();
    evi_cmd->add_option("--rho2", evi_rho2, "Second-order exponent rho (< 0)")
        ->envname("OTRISK_RHO2")
        ->capture_default_str();
    evi_cmd->add_flag("--smoothed", evi_smoothed, "Use smoothed potential observables");
    add_xi(evi_cmd, evi_xi);
    add_common(evi_cmd, evi_common);

    // qq
    auto* qq_cmd = app.add_subcommand("qq", "Pareto QQ data of the potential observables");
    CommonOptions qq_common;
    XiOptions qq_xi;
    std::string qq_fit = "fit.json";
    bool qq_smoothed = false;
    qq_cmd->add_option("--fit", qq_fit, "Fit archive")->capture_default_str();
    qq_cmd->add_flag("--smoothed", qq_smoothed, "Use smoothed potential observables");
    add_xi(qq_cmd, qq_xi);
    add_common(qq_cmd, qq_common);

    // rolling
    auto* roll_cmd = app.add_subcommand("rolling", "Rolling-window fit + risk + EVI pipeline");
    CommonOptions roll_common;
    XiOptions roll_xi;
    FitFileOptions roll_file;
    int roll_window = 36, roll_step = 1;
    Index roll_m = 10;
    std::uint64_t roll_seed = 0;
    double roll_p = 0.1, roll_tau = 0.0, roll_rho2 = -1.0;
    Index roll_k = 0;
    roll_cmd->add_option("--input", roll_file.input, "Price/return CSV")->required();
    roll_cmd->add_option("--date-column", roll_file.date_column, "Date column name (default Date)");
    roll_cmd->add_flag("--log-returns", roll_file.take_log_returns,
                       "Transform price levels to log-returns");
    roll_cmd->add_option("--window-months", roll_window, "Trailing window length")
        ->capture_default_str();
    roll_cmd->add_option("--step-months", roll_step, "Label step")->capture_default_str();
    roll_cmd->add_option("--m", roll_m, "Averaged grids per window")
        ->envname("OTRISK_M")
        ->capture_default_str();
    roll_cmd->add_option("--seed", roll_seed, "RNG seed")
        ->envname("OTRISK_SEED")
        ->capture_default_str();
    roll_cmd->add_option("--p", roll_p, "Tail order")->envname("OTRISK_P")->capture_default_str();
    roll_cmd->add_option("--k", roll_k, "EVI order statistic count (0 = auto)");
    roll_cmd->add_option("--tau", roll_tau, "Ridge parameter")->capture_default_str();
    roll_cmd->add_option("--rho2", roll_rho2, "Second-order exponent rho (< 0)")
        ->capture_default_str();
    add_xi(roll_cmd, roll_xi);
    add_common(roll_cmd, roll_common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_dist, sim_common);
        if (fit_cmd->parsed())
            return run_fit(fit_dist, fit_file, fit_m, fit_xi, fit_common, command_line);
        if (risk_cmd->parsed())
            return run_risk(risk_fit, risk_p, risk_xi, risk_surface_flag, risk_common,
                            command_line);
        if (cont_cmd->parsed())
            return run_contours(cont_fit, cont_orders, cont_points, cont_signs, cont_xi, cont_seed,
                                cont_common);
        if (vol_cmd->parsed())
            return run_volumes(vol_fit, vol_orders, vol_reference, vol_xi, vol_common,
                               command_line);
        if (evi_cmd->parsed())
            return run_evi(evi_fit, evi_kmax, evi_tau, evi_rho2, evi_smoothed, evi_xi, evi_common,
                           command_line);
        if (qq_cmd->parsed()) return run_qq(qq_fit, qq_smoothed, qq_xi, qq_common, command_line);
        if (roll_cmd->parsed())
            return run_rolling(roll_file, roll_window, roll_step, roll_m, roll_seed, roll_p,
                               roll_k, roll_tau, roll_rho2, roll_xi, roll_common, command_line);
    } catch (const Error& e) {
        std::cerr << nlohmann::json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump()
                  << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()
                  << std::endl;
        return 3;
    }
    return 1;
}
