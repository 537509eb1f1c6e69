#include "bbm/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bbm/expansion.hpp"
#include "bbm/io.hpp"
#include "bbm/measures.hpp"
#include "bbm/spine.hpp"
#include "bbm/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bbm {

using nlohmann::json;

namespace {

constexpr const char* VERSION = "1.0.0";

std::string multi_index_str(const MultiIndex& k) {
    std::string s;
    for (int j = 0; j < k.dim(); ++j) {
        if (j) s += ';';
        s += std::to_string(k.entries[std::size_t(j)]);
    }
    return s;
}

std::string vector_str(std::span<const double> v) {
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) s += ';';
        s += io::format_double(v[j]);
    }
    return s;
}

struct OutputWriter {
    std::filesystem::path dir;
    std::vector<std::pair<std::string, std::string>>* digests;

    std::filesystem::path open(const std::string& name, std::ofstream& out) const {
        const auto path = dir / name;
        out.open(path);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        return path;
    }

    void finish(const std::string& name) const {
        digests->emplace_back(name, io::digest_hex(io::file_digest(dir / name)));
    }
};

// ---------------------------------------------------------------- specfun

double binomial(int n, int k) {
    return std::round(std::exp(specfun::log_factorial(n) -
                               specfun::log_factorial(k) -
                               specfun::log_factorial(n - k)));
}

double central_difference(int k, double b, double h) {
    double sum = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        sum += sign * binomial(k, i) *
               specfun::std_normal_cdf(b + (0.5 * k - double(i)) * h);
    }
    return sum / std::pow(h, double(k));
}

}  // namespace

double cdf_derivative_fd(int k, double b) {
    // Ridders: geometric step shrinkage with a Neville table in h^2, keep
    // the entry with the smallest estimated error.
    constexpr int STEPS = 12;
    constexpr double H0 = 1.0;
    constexpr double SHRINK = 1.4;
    double table[STEPS][STEPS];
    double best = 0.0, best_err = HUGE_VAL;
    double h = H0;
    table[0][0] = central_difference(k, b, h);
    for (int i = 1; i < STEPS; ++i) {
        h /= SHRINK;
        table[i][0] = central_difference(k, b, h);
        double factor = SHRINK * SHRINK;
        for (int j = 1; j <= i; ++j) {
            table[i][j] =
                (factor * table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            factor *= SHRINK * SHRINK;
            const double err = std::max(std::abs(table[i][j] - table[i][j - 1]),
                                        std::abs(table[i][j] - table[i - 1][j - 1]));
            if (err < best_err) {
                best_err = err;
                best = table[i][j];
            }
        }
    }
    return best;
}

namespace {

double hermite_explicit_sum(int k, double x) {
    // Signed coefficients k!(-1)^j / (2^j j! (k-2j)!) are integers; build them
    // exactly by the term ratio. Extended precision absorbs the cancellation
    // between terms at large k and |x|.
    long double coeff = 1.0L;
    long double sum = 0.0L;
    for (int j = 0; 2 * j <= k; ++j) {
        sum += coeff * powl((long double)x, (long double)(k - 2 * j));
        coeff *= -(long double)((k - 2 * j) * (k - 2 * j - 1)) /
                 (2.0L * (long double)(j + 1));
    }
    return double(sum);
}

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Truncation order for the Mehler series: at least 60 terms, more as rho
// approaches 1 so the geometric tail stays below 1e-11 on the check grid.
int mehler_terms(double rho) {
    if (rho <= 0.0) return 60;
    return std::max(60, int(std::ceil(std::log(1e-11) / std::log(rho))));
}

}  // namespace

std::vector<CheckResult> run_specfun_checks() {
    std::vector<CheckResult> results;
    auto add = [&](const std::string& name, double max_err, double tol) {
        results.push_back({name, max_err, tol, max_err <= tol});
    };

    {  // recurrence vs explicit sum, k <= 25, integer grid
        double worst = 0.0;
        for (int k = 0; k <= 25; ++k)
            for (int xi = -4; xi <= 4; ++xi)
                worst = std::max(worst, rel_err(specfun::hermite(k, xi),
                                                hermite_explicit_sum(k, xi)));
        add("hermite_recurrence_vs_sum", worst, 1e-10);
    }
    {  // |H_k(x)| <= 2 sqrt(k!) e^{x^2/4}
        double worst = 0.0;  // worst margin violation
        for (int k = 1; k <= 20; ++k)
            for (double x = -6.0; x <= 6.0 + 1e-9; x += 0.25) {
                const double bound = 2.0 * std::sqrt(specfun::factorial(k)) *
                                     std::exp(x * x / 4.0);
                worst = std::max(worst,
                                 (std::abs(specfun::hermite(k, x)) - bound) / bound);
            }
        add("hermite_upper_bound", worst, 0.0);
    }
    {  // heat_poly(k,x,t) = t^{k/2} H_k(x/sqrt(t))
        double worst = 0.0;
        for (int k = 0; k <= 12; ++k)
            for (double t : {0.01, 1.0, 100.0})
                for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.5) {
                    const double direct = std::pow(t, 0.5 * k) *
                                          specfun::hermite(k, x / std::sqrt(t));
                    worst = std::max(worst,
                                     rel_err(specfun::heat_poly(k, x, t), direct));
                }
        add("heat_poly_consistency", worst, 1e-10);
    }
    {  // d_t h + 1/2 d_xx h = 0 by Richardson-extrapolated central differences
        double worst = 0.0;
        const double h = 5e-3;
        auto residual = [](int k, double x, double t, double step) {
            const double dt = (specfun::heat_poly(k, x, t + step) -
                               specfun::heat_poly(k, x, t - step)) /
                              (2.0 * step);
            const double dxx = (specfun::heat_poly(k, x + step, t) -
                                2.0 * specfun::heat_poly(k, x, t) +
                                specfun::heat_poly(k, x - step, t)) /
                               (step * step);
            return dt + 0.5 * dxx;
        };
        for (int k = 1; k <= 8; ++k)
            for (double t : {0.5, 1.0, 2.0})
                for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.5) {
                    const double r = (4.0 * residual(k, x, t, h / 2) -
                                      residual(k, x, t, h)) /
                                     3.0;
                    const double scale =
                        std::max(1.0, std::abs(specfun::heat_poly(k, x, t)));
                    worst = std::max(worst, std::abs(r) / scale);
                }
        add("heat_poly_harmonicity", worst, 1e-6);
    }
    {  // cdf_derivative vs finite differences
        double worst = 0.0;
        for (int k = 1; k <= 6; ++k)
            for (double b = -3.0; b <= 3.0 + 1e-9; b += 0.5)
                worst = std::max(worst, rel_err(specfun::cdf_derivative(k, b),
                                                cdf_derivative_fd(k, b)));
        add("cdf_derivative_vs_fd", worst, 1e-6);
    }
    {  // Mehler CDF: within tail bound and within 1e-8 of the closed form
        double worst_direct = 0.0, worst_bound = 0.0;
        for (double rho = 0.1; rho <= 0.9 + 1e-9; rho += 0.1)
            for (double b = -3.0; b <= 3.0 + 1e-9; b += 0.5)
                for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.5) {
                    const auto [value, tail] =
                        specfun::mehler_cdf(rho, b, x, mehler_terms(rho));
                    const double direct = specfun::std_normal_cdf(
                        (b - rho * x) / std::sqrt(1.0 - rho * rho));
                    const double err = std::abs(value - direct);
                    worst_direct = std::max(worst_direct, err);
                    worst_bound = std::max(worst_bound, err - tail);
                }
        add("mehler_cdf_direct", worst_direct, 1e-8);
        add("mehler_cdf_tail_bound", worst_bound, 0.0);
    }
    {  // Mehler PDF
        double worst = 0.0;
        for (double rho = 0.1; rho <= 0.9 + 1e-9; rho += 0.1)
            for (double b = -3.0; b <= 3.0 + 1e-9; b += 0.5)
                for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.5) {
                    const double value =
                        specfun::mehler_pdf(rho, b, x, mehler_terms(rho));
                    const double q = 1.0 - rho * rho;
                    const double direct =
                        specfun::std_normal_pdf((b - rho * x) / std::sqrt(q)) /
                        std::sqrt(q);
                    worst = std::max(worst, std::abs(value - direct));
                }
        add("mehler_pdf_direct", worst, 1e-8);
    }
    return results;
}

namespace {

// ------------------------------------------------------------ mode runners

void run_simulate(const ExperimentConfig& cfg, const OutputWriter& out,
                  RunManifest& manifest) {
    for (std::uint64_t seed : cfg.seeds) {
        try {
            const Trajectory traj =
                simulate(cfg.params, cfg.schedule, seed, cfg.workers, cfg.cap);
            for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof name, "seed%llu_snap%02zu.csv",
                              (unsigned long long)seed, i);
                io::write_snapshot(out.dir / name, traj.snapshots[i],
                                   cfg.params.d);
                out.finish(name);
            }
            manifest.seed_status.push_back({seed, "ok"});
        } catch (const PopulationCapExceeded&) {
            manifest.seed_status.push_back({seed, "POPULATION_CAP_EXCEEDED"});
            manifest.exit_code = EXIT_RESOURCE_CAP;
        }
    }
}

void run_verify_specfun(const ExperimentConfig&, const OutputWriter& out,
                        RunManifest& manifest) {
    const auto checks = run_specfun_checks();
    std::ofstream csv;
    out.open("specfun_checks.csv", csv);
    csv << "check,max_error,tolerance,pass\n";
    bool all_pass = true;
    for (const auto& c : checks) {
        csv << c.name << ',' << io::format_double(c.max_error) << ','
            << io::format_double(c.tolerance) << ',' << (c.pass ? 1 : 0) << "\n";
        all_pass = all_pass && c.pass;
    }
    csv.close();
    out.finish("specfun_checks.csv");
    if (!all_pass) manifest.exit_code = EXIT_CHECK_FAILED;
}

void run_verify_many_to_one(const ExperimentConfig& cfg, const OutputWriter& out,
                            RunManifest& manifest) {
    const double t = cfg.schedule.at(0);
    std::vector<double> b = cfg.b;
    if (b.empty()) b.assign(std::size_t(cfg.params.d), 0.0);
    const auto rows = spine::verify_many_to_one(
        cfg.params, t, cfg.num_traj, cfg.seeds.at(0), b, cfg.workers);
    std::ofstream csv;
    out.open("many_to_one.csv", csv);
    csv << "functional,t,theta,forward_mean,forward_se,quadrature,zscore\n";
    bool all_pass = true;
    for (const auto& r : rows) {
        csv << r.functional << ',' << io::format_double(r.t) << ','
            << vector_str(cfg.params.theta) << ','
            << io::format_double(r.forward_mean) << ','
            << io::format_double(r.forward_se) << ','
            << io::format_double(r.quadrature) << ','
            << io::format_double(r.zscore) << "\n";
        all_pass = all_pass && std::abs(r.zscore) < 3.0;
    }
    csv.close();
    out.finish("many_to_one.csv");
    if (!all_pass) manifest.exit_code = EXIT_CHECK_FAILED;
}

void run_martingales(const ExperimentConfig& cfg, const OutputWriter& out,
                     RunManifest& manifest) {
    std::vector<MultiIndex> ks;
    for (int ell = 0; ell <= cfg.k_max; ++ell)
        for (const auto& k : expansion::multi_indices_of_order(ell, cfg.params.d))
            ks.push_back(k);

    const std::size_t ns = cfg.seeds.size();
    // [k][time][seed]
    std::vector<std::vector<std::vector<double>>> values(
        ks.size(), std::vector<std::vector<double>>(
                       cfg.schedule.size(), std::vector<double>(ns)));
    std::vector<std::string> status(ns, "ok");

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
#endif
    for (std::size_t i = 0; i < ns; ++i) {
        try {
            const Trajectory traj =
                simulate(cfg.params, cfg.schedule, cfg.seeds[i], 1, cfg.cap);
            for (std::size_t ti = 0; ti < traj.snapshots.size(); ++ti)
                for (std::size_t ki = 0; ki < ks.size(); ++ki)
                    values[ki][ti][i] = measures::serial_hermite_martingale(
                        traj.snapshots[ti], cfg.params, ks[ki]);
        } catch (const PopulationCapExceeded&) {
            status[i] = "POPULATION_CAP_EXCEEDED";
        }
    }

    for (std::size_t i = 0; i < ns; ++i) {
        manifest.seed_status.push_back({cfg.seeds[i], status[i]});
        if (status[i] != "ok") manifest.exit_code = EXIT_RESOURCE_CAP;
    }

    std::ofstream csv;
    out.open("martingales.csv", csv);
    csv << "time,k_multiindex,theta,mean,se,pass\n";
    bool all_pass = true;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const double target = (ks[ki].order() == 0) ? 1.0 : 0.0;
        for (std::size_t ti = 0; ti < cfg.schedule.size(); ++ti) {
            const auto ms = stats::mean_se(values[ki][ti]);
            const bool pass = std::abs(ms.mean - target) < 3.0 * ms.se;
            csv << io::format_double(cfg.schedule[ti]) << ','
                << multi_index_str(ks[ki]) << ',' << vector_str(cfg.params.theta)
                << ',' << io::format_double(ms.mean) << ','
                << io::format_double(ms.se) << ',' << (pass ? 1 : 0) << "\n";
            all_pass = all_pass && pass;
        }
    }
    csv.close();
    out.finish("martingales.csv");
    if (!all_pass && manifest.exit_code == EXIT_OK)
        manifest.exit_code = EXIT_CHECK_FAILED;
}

void run_expansion(const ExperimentConfig& cfg, const OutputWriter& out,
                   RunManifest& manifest, expansion::Mode mode) {
    const std::size_t ns = cfg.seeds.size();
    std::vector<expansion::ExpansionReport> reports(ns);
    std::vector<std::string> status(ns, "ok");

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
#endif
    for (std::size_t i = 0; i < ns; ++i) {
        try {
            const Trajectory traj =
                simulate(cfg.params, cfg.schedule, cfg.seeds[i], 1, cfg.cap);
            reports[i] = expansion::residual_report(traj, cfg.params, cfg.m,
                                                    cfg.a, cfg.b, mode);
        } catch (const PopulationCapExceeded&) {
            status[i] = "POPULATION_CAP_EXCEEDED";
        }
    }

    bool any_ok = false;
    for (std::size_t i = 0; i < ns; ++i) {
        manifest.seed_status.push_back({cfg.seeds[i], status[i]});
        if (status[i] != "ok")
            manifest.exit_code = EXIT_RESOURCE_CAP;
        else
            any_ok = true;
    }

    std::ofstream csv;
    out.open("expansion.csv", csv);
    csv << "seed,s,ell,measured,partial_sum,residual\n";
    for (std::size_t i = 0; i < ns; ++i) {
        if (status[i] != "ok") continue;
        const auto& r = reports[i];
        for (std::size_t ti = 0; ti < r.grid.size(); ++ti)
            for (int ell = 0; ell <= r.m; ++ell)
                csv << cfg.seeds[i] << ',' << io::format_double(r.grid[ti]) << ','
                    << ell << ',' << io::format_double(r.measured[ti]) << ','
                    << io::format_double(r.partial_sums[ti][std::size_t(ell)])
                    << ','
                    << io::format_double(r.residuals[ti][std::size_t(ell)])
                    << "\n";
    }
    csv.close();
    out.finish("expansion.csv");

    // ensemble summary: median |r_ell| per grid point, mean slope per ell
    json summary;
    summary["mode"] = (mode == expansion::Mode::thm1) ? "thm1" : "thm2";
    summary["m"] = cfg.m;
    summary["seeds"] = ns;
    if (any_ok) {
        json slopes = json::object();
        json medians = json::object();
        for (int ell = 0; ell <= cfg.m; ++ell) {
            std::vector<double> slope_samples;
            json per_s = json::array();
            for (std::size_t ti = 0; ti < cfg.schedule.size(); ++ti) {
                std::vector<double> abs_r;
                for (std::size_t i = 0; i < ns; ++i)
                    if (status[i] == "ok")
                        abs_r.push_back(std::abs(
                            reports[i].residuals[ti][std::size_t(ell)]));
                per_s.push_back(stats::median(std::move(abs_r)));
            }
            for (std::size_t i = 0; i < ns; ++i)
                if (status[i] == "ok")
                    slope_samples.push_back(reports[i].slopes[std::size_t(ell)]);
            double mean_slope = 0.0;
            for (double v : slope_samples) mean_slope += v;
            mean_slope /= double(slope_samples.size());
            slopes[std::to_string(ell)] = mean_slope;
            medians[std::to_string(ell)] = per_s;
        }
        summary["slopes"] = slopes;
        summary["median_abs_residuals"] = medians;
        for (std::size_t i = 0; i < ns; ++i)
            if (status[i] == "ok") {
                summary["horizon"] = reports[i].horizon;
                break;
            }
    }
    summary["grid"] = cfg.schedule;
    summary["params"] = json::parse(cfg.to_json_text());
    std::ofstream js;
    out.open("expansion_summary.json", js);
    js << summary.dump(2) << "\n";
    js.close();
    out.finish("expansion_summary.json");
}

void run_moment_growth(const ExperimentConfig& cfg, const OutputWriter& out,
                       RunManifest& manifest) {
    const std::size_t ns = cfg.seeds.size();
    // [time][seed] of (W+1) log^{1+lambda}(W+1)
    std::vector<std::vector<double>> vals(cfg.schedule.size(),
                                          std::vector<double>(ns));
    std::vector<std::string> status(ns, "ok");

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
#endif
    for (std::size_t i = 0; i < ns; ++i) {
        try {
            const Trajectory traj =
                simulate(cfg.params, cfg.schedule, cfg.seeds[i], 1, cfg.cap);
            for (std::size_t ti = 0; ti < traj.snapshots.size(); ++ti) {
                const double w = measures::serial_hermite_martingale(
                    traj.snapshots[ti], cfg.params,
                    MultiIndex::zeros(cfg.params.d));
                vals[ti][i] = (w + 1.0) *
                              std::pow(std::log(w + 1.0), 1.0 + cfg.lambda);
            }
        } catch (const PopulationCapExceeded&) {
            status[i] = "POPULATION_CAP_EXCEEDED";
        }
    }
    for (std::size_t i = 0; i < ns; ++i) {
        manifest.seed_status.push_back({cfg.seeds[i], status[i]});
        if (status[i] != "ok") manifest.exit_code = EXIT_RESOURCE_CAP;
    }

    std::ofstream csv;
    out.open("moment_growth.csv", csv);
    csv << "t,estimate,ratio\n";
    double rmin = HUGE_VAL, rmax = 0.0;
    for (std::size_t ti = 0; ti < cfg.schedule.size(); ++ti) {
        double mean = 0.0;
        for (double v : vals[ti]) mean += v;
        mean /= double(ns);
        const double ratio = mean / (cfg.schedule[ti] + 1.0);
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
        csv << io::format_double(cfg.schedule[ti]) << ','
            << io::format_double(mean) << ',' << io::format_double(ratio) << "\n";
    }
    csv.close();
    out.finish("moment_growth.csv");
    if (rmax / rmin >= 10.0 && manifest.exit_code == EXIT_OK)
        manifest.exit_code = EXIT_CHECK_FAILED;
}

}  // namespace

RunManifest run(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.version = VERSION;
    manifest.config_echo = config.to_json_text();

    config.validate();
    std::filesystem::create_directories(config.out_dir);
    OutputWriter out{config.out_dir, &manifest.output_digests};

    switch (config.mode) {
        case Mode::simulate: run_simulate(config, out, manifest); break;
        case Mode::verify_specfun: run_verify_specfun(config, out, manifest); break;
        case Mode::verify_many_to_one:
            run_verify_many_to_one(config, out, manifest);
            break;
        case Mode::martingales: run_martingales(config, out, manifest); break;
        case Mode::expansion_thm1:
            run_expansion(config, out, manifest, expansion::Mode::thm1);
            break;
        case Mode::expansion_thm2:
            run_expansion(config, out, manifest, expansion::Mode::thm2);
            break;
        case Mode::moment_growth: run_moment_growth(config, out, manifest); break;
    }

    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    // manifest written atomically: temp file then rename
    json j;
    j["version"] = manifest.version;
    j["config"] = json::parse(manifest.config_echo);
    j["wall_time_s"] = manifest.wall_time_s;
    j["exit_code"] = manifest.exit_code;
    json seeds = json::array();
    for (const auto& s : manifest.seed_status)
        seeds.push_back({{"seed", std::to_string(s.seed)}, {"status", s.status}});
    j["seed_status"] = seeds;
    json digests = json::object();
    for (const auto& [name, digest] : manifest.output_digests)
        digests[name] = digest;
    j["output_digests"] = digests;

    const auto tmp = config.out_dir / "manifest.json.tmp";
    {
        std::ofstream mf(tmp);
        mf << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, config.out_dir / "manifest.json");
    return manifest;
}

}  // namespace bbm
