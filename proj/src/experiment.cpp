#include "rmaps/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmaps/errors.hpp"
#include "rmaps/mc.hpp"
#include "rmaps/parallel.hpp"

namespace rmaps {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string iso_timestamp() {
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    else
        t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Emitter {
public:
    Emitter(const ExperimentConfig& cfg, const RunOptions& opts) {
        manifest_.version = kToolVersion;
        manifest_.config_hash = config_hash(cfg);
        manifest_.created = iso_timestamp();
        manifest_.out_dir = opts.out_dir.empty() ? cfg.output.dir : opts.out_dir;
        fs::create_directories(manifest_.out_dir);
    }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(manifest_.out_dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + name);
        out << content;
        manifest_.outputs.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

    void write_binary(const std::string& name, const std::function<void(std::ostream&)>& fn) {
        std::ofstream out(fs::path(manifest_.out_dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + name);
        fn(out);
        manifest_.outputs.push_back(name);
    }

    void assert_limit(const std::string& name, bool pass, double value, double limit) {
        manifest_.assertions.push_back({name, pass, value, limit});
    }

    RunManifest finish() {
        manifest_.outputs.push_back("manifest.json");
        write_manifest_json(manifest_,
                            (fs::path(manifest_.out_dir) / "manifest.json").string());
        return manifest_;
    }

private:
    RunManifest manifest_;
};

std::string density_dump(const DensityVector& v) {
    std::string s;
    s.reserve(v.values.size() * 24);
    for (int i = 0; i < v.grid->cells(); ++i)
        s += fmt(v.grid->midpoint(i)) + " " + fmt(v.values[i]) + "\n";
    return s;
}

json period_json(const PiecewiseMap& map, double z) {
    json j;
    try {
        PeriodInfo info = map.detect_period(z);
        j["is_periodic"] = info.is_periodic;
        j["period"] = info.period;
        j["derivative_of_iterate"] = info.derivative_of_iterate;
        j["smooth_neighborhood"] = info.smooth_neighborhood;
    } catch (const AmbiguityError& ex) {
        j["error"] = ex.what();
    }
    return j;
}

bool no_growth(const std::vector<std::pair<int, double>>& trace) {
    if (trace.size() < 21) return true;
    double first = 0, last = 0;
    for (int i = 1; i <= 10; ++i) first += trace[i].second;
    for (std::size_t i = trace.size() - 10; i < trace.size(); ++i) last += trace[i].second;
    return last <= first + 1e-12;
}

}  // namespace

PiecewiseMap map_from_config(const ExperimentConfig& cfg) {
    if (cfg.map.family == "doubling") return make_doubling();
    if (cfg.map.family == "metastable") return make_metastable(cfg.map.c, cfg.map.omega);
    // affine branch list "lo:hi:slope:intercept;..."
    std::vector<Branch> branches;
    std::stringstream ss(cfg.map.branches);
    std::string part;
    while (std::getline(ss, part, ';')) {
        double v[4];
        int n = std::sscanf(part.c_str(), "%lf:%lf:%lf:%lf", &v[0], &v[1], &v[2], &v[3]);
        if (n != 4) throw ConfigError("config: [map] branches entry '" + part + "' is malformed");
        branches.emplace_back(v[0], v[1], AffineShape{v[2], v[3]});
    }
    MapContext ctx =
        cfg.map.context == "metastable" ? MapContext::metastable : MapContext::open_system;
    return PiecewiseMap(std::move(branches), cfg.map.expansion_bound, ctx, cfg.map.circle);
}

HoleFamily holes_from_config(const ExperimentConfig& cfg) {
    if (!cfg.holes) throw ConfigError("config: [holes] section is required");
    if (cfg.holes->kind == "symmetric")
        return HoleFamily::symmetric(cfg.holes->z, cfg.holes->circle);
    return HoleFamily::right_sided(cfg.holes->z);
}

std::function<NoiseModel(double)> noise_builder_from_config(const ExperimentConfig& cfg) {
    if (!cfg.noise) throw ConfigError("config: [noise] section is required");
    NoiseBlock n = *cfg.noise;
    if (n.kind == "uniform") return [n](double eps) { return make_uniform_noise(eps, n.L); };
    if (n.kind == "conditionC")
        return [n](double eps) { return make_condition_C_noise(eps, *n.upsilon, n.L); };
    return [](double eps) { return make_deterministic_noise(eps); };
}

EscapeFixture fixture_from_config(const ExperimentConfig& cfg) {
    EscapeFixture fx{map_from_config(cfg), holes_from_config(cfg),
                     noise_builder_from_config(cfg)};
    fx.N = cfg.grid.N;
    fx.orbit_depth = cfg.grid.orbit_depth;
    return fx;
}

std::pair<double, double> plateau_heights(const MetastableReport& rep,
                                          const PerturbedFamily& family, const NoiseModel& noise,
                                          double margin) {
    IntervalSet avoid;
    for (const auto& atom : noise.atoms) {
        SideHoles h = compute_holes(family, atom.omega);
        for (const auto& iv : h.left) avoid.push_back(iv);
        for (const auto& iv : h.right) avoid.push_back(iv);
    }
    avoid = normalized(std::move(avoid));
    const Grid& g = *rep.rho_eps.grid;
    auto clear_of = [&](double x) {
        if (x < margin || x > 1.0 - margin) return false;
        if (std::abs(x - family.b) < margin) return false;
        for (const auto& iv : avoid)
            if (x > iv.lo - margin && x < iv.hi + margin) return false;
        return true;
    };
    std::vector<double> left, right;
    for (int i = 0; i < g.cells(); ++i) {
        double x = g.midpoint(i);
        if (!clear_of(x)) continue;
        (x < family.b ? left : right).push_back(rep.rho_eps.values[i]);
    }
    auto median = [](std::vector<double>& v) {
        if (v.empty()) return 0.0;
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    return {median(left), median(right)};
}

RunManifest run_escape(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate_config(cfg);
    if (!cfg.sweep || cfg.sweep->eps.empty())
        throw ConfigError("config: [sweep] eps list is required for escape runs");
    EscapeFixture fx = fixture_from_config(cfg);
    Emitter em(cfg, opts);

    const auto& eps_list = cfg.sweep->eps;
    const int n = static_cast<int>(eps_list.size());
    std::vector<EscapeRow> rows(n);
    std::vector<double> identity_residuals(n, 0.0);
    std::vector<double> ly_sups(n, 0.0);
    std::vector<char> ly_flat(n, 1);
    std::vector<std::string> row_errors(n);
    parallel_for_index(n, opts.jobs, [&](int i) {
        try {
            OpenSolve sol = solve_open_fixture(fx, eps_list[i]);
            rows[i] = sol.row;
            identity_residuals[i] = check_eigen_identity(sol.pair, sol.noise, fx.holes);
            auto trace = ly_diagnostic(sol.op, DensityVector::ones(sol.op.grid_ptr()), 50);
            for (const auto& [k, v] : trace) ly_sups[i] = std::max(ly_sups[i], v);
            ly_flat[i] = no_growth(trace) ? 1 : 0;
        } catch (const std::exception& ex) {
            row_errors[i] = ex.what();
        }
    });

    std::vector<EscapeRow> ok_rows;
    json errors = json::array();
    for (int i = 0; i < n; ++i) {
        if (row_errors[i].empty())
            ok_rows.push_back(rows[i]);
        else
            errors.push_back({{"eps", eps_list[i]}, {"message", row_errors[i]}});
    }

    double theoretical = theoretical_limit(fx.map, fx.holes.center());
    LinearFit fit = extrapolate_limit(ok_rows);
    double abs_error = std::abs(fit.intercept - theoretical);

    // escape_table.csv
    std::string csv = "eps,e_eps,rate,A_eps,Delta_eps,ratio,grid_N,residual\n";
    std::string plot;
    for (const auto& r : ok_rows) {
        csv += fmt(r.eps) + "," + fmt(r.e_eps) + "," + fmt(r.rate) + "," + fmt(r.A_eps) + "," +
               fmt(r.Delta_eps) + "," + fmt(r.ratio) + "," + std::to_string(r.grid_N) + "," +
               fmt(r.residual) + "\n";
        plot += fmt(r.eps) + " " + fmt(r.ratio) + "\n";
    }
    em.write_text("escape_table.csv", csv);
    em.write_text("ratio.dat", plot);

    json summary;
    summary["map"] = cfg.map.family;
    summary["z"] = fx.holes.center();
    summary["period_info"] = period_json(fx.map, fx.holes.center());
    summary["theoretical_limit"] = theoretical;
    summary["extrapolated_limit"] = fit.intercept;
    summary["fit_slope"] = fit.slope;
    summary["fit_rms_residual"] = fit.rms_residual;
    summary["abs_error"] = abs_error;
    json jrows = json::array();
    for (int i = 0; i < n; ++i) {
        if (!row_errors[i].empty()) continue;
        const auto& r = rows[i];
        jrows.push_back({{"eps", r.eps},
                         {"e_eps", r.e_eps},
                         {"rate", r.rate},
                         {"A_eps", r.A_eps},
                         {"Delta_eps", r.Delta_eps},
                         {"ratio", r.ratio},
                         {"grid_N", r.grid_N},
                         {"residual", r.residual},
                         {"eigen_identity_residual", identity_residuals[i]},
                         {"ly_sup_variation", ly_sups[i]},
                         {"ly_no_growth", static_cast<bool>(ly_flat[i])}});
    }
    summary["rows"] = jrows;
    summary["errors"] = errors;

    // q_k study on the common grid of its own eps
    if (cfg.qk) {
        NoiseModel noise = fx.noise_for_eps(cfg.qk->eps);
        GridPtr grid = escape_grid(fx.map, noise, fx.holes, fx.N, fx.orbit_depth);
        DensityVector rho = closed_invariant_density(fx.map, grid);
        QkTable table = qk_terms(fx.map, rho, grid, noise, fx.holes, cfg.qk->k_max);
        OpenSolve sol = solve_open_fixture(fx, cfg.qk->eps);
        std::string qcsv = "eps,k,q\n";
        for (std::size_t k = 0; k < table.q.size(); ++k)
            qcsv += fmt(table.eps) + "," + std::to_string(k) + "," + fmt(table.q[k]) + "\n";
        em.write_text("qk_table.csv", qcsv);
        double gap = std::abs(1.0 - table.partial_sum - sol.row.ratio);
        summary["qk"] = {{"eps", table.eps},
                         {"k_max", cfg.qk->k_max},
                         {"q", table.q},
                         {"partial_sum", table.partial_sum},
                         {"ratio_at_eps", sol.row.ratio},
                         {"consistency_gap", gap},
                         {"relative_gap", gap / sol.row.ratio}};
        if (auto it = cfg.acceptance.find("qk_gap_limit"); it != cfg.acceptance.end())
            em.assert_limit("qk_gap_limit", gap <= it->second * sol.row.ratio,
                            gap / sol.row.ratio, it->second);
    }

    // Monte Carlo cross-check at one eps of the sweep
    if (cfg.mc) {
        double mc_eps = cfg.mc->eps.value_or(eps_list.front());
        OpenSolve sol = solve_open_fixture(fx, mc_eps);
        RngSpec rng{opts.seed.value_or(cfg.mc->seed)};
        SurvivalCurve curve =
            simulate_survival(fx.map, fx.holes, sol.noise, static_cast<int>(cfg.mc->n_steps),
                              cfg.mc->n_traj, rng, opts.jobs);
        double z = mc_vs_spectral(curve, sol.pair);
        std::string scsv = "k,survivors\n";
        std::string sdat;
        for (std::size_t k = 0; k < curve.survivors.size(); ++k) {
            scsv += std::to_string(k) + "," + std::to_string(curve.survivors[k]) + "\n";
            sdat += std::to_string(k) + " " + std::to_string(curve.survivors[k]) + "\n";
        }
        em.write_text("survival.csv", scsv);
        em.write_text("survival.dat", sdat);
        summary["mc"] = {{"eps", mc_eps},
                         {"lambda_hat", curve.fit.lambda_hat},
                         {"stderr", curve.fit.stderr_hat},
                         {"r_squared", curve.fit.r_squared},
                         {"window", {curve.fit.window_lo, curve.fit.window_hi}},
                         {"n_traj", curve.n_traj},
                         {"seed", rng.seed},
                         {"spectral_rate", sol.row.rate},
                         {"z_score", z}};
        if (auto it = cfg.acceptance.find("mc_z_limit"); it != cfg.acceptance.end())
            em.assert_limit("mc_z_limit", curve.fit.ok && std::abs(z) <= it->second, std::abs(z),
                            it->second);
    }

    em.write_json("summary.json", summary);

    if (auto it = cfg.acceptance.find("rel_error_limit"); it != cfg.acceptance.end())
        em.assert_limit("rel_error_limit", abs_error <= it->second * theoretical,
                        abs_error / theoretical, it->second);
    if (auto it = cfg.acceptance.find("eigen_identity_limit"); it != cfg.acceptance.end()) {
        double worst = 0.0;
        for (double r : identity_residuals) worst = std::max(worst, r);
        em.assert_limit("eigen_identity_limit", worst <= it->second, worst, it->second);
    }
    if (auto it = cfg.acceptance.find("ly_no_growth"); it != cfg.acceptance.end()) {
        bool all = std::all_of(ly_flat.begin(), ly_flat.end(), [](char c) { return c != 0; });
        em.assert_limit("ly_no_growth", all, all ? 1.0 : 0.0, it->second);
    }
    return em.finish();
}

RunManifest run_metastable(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate_config(cfg);
    if (cfg.map.family != "metastable")
        throw ConfigError("config: [map] family must be metastable for this command");
    if (!cfg.sweep || cfg.sweep->eps.empty())
        throw ConfigError("config: [sweep] eps list is required");
    std::vector<double> c_list = cfg.sweep->c.empty() ? std::vector<double>{cfg.map.c}
                                                      : cfg.sweep->c;
    auto noise_of = noise_builder_from_config(cfg);
    Emitter em(cfg, opts);

    const auto& eps_list = cfg.sweep->eps;
    const int nc = static_cast<int>(c_list.size());
    const int ne = static_cast<int>(eps_list.size());
    std::vector<MetastableReport> cells(nc * ne);
    std::vector<std::pair<double, double>> plateaus(nc * ne);
    std::vector<B4Result> b4(nc);
    parallel_for_index(nc * ne, opts.jobs, [&](int idx) {
        int ic = idx / ne, ie = idx % ne;
        PerturbedFamily family = make_benchmark_family(c_list[ic]);
        NoiseModel noise = noise_of(eps_list[ie]);
        cells[idx] = stationary_and_compare(family, noise, cfg.grid.N);
        plateaus[idx] = plateau_heights(cells[idx], family, noise);
        if (ie == ne - 1) b4[ic] = check_B4(family, noise);
    });

    std::string csv =
        "c,eps,grid_N,alpha_pred,alpha_mass,l1_error,balance_residual,e_left,e_right,"
        "ratio_forward,ratio_reverse\n";
    json jcells = json::array();
    for (int idx = 0; idx < nc * ne; ++idx) {
        const auto& r = cells[idx];
        csv += fmt(r.c) + "," + fmt(r.eps) + "," + std::to_string(r.grid_N) + "," +
               fmt(r.alpha_pred) + "," + fmt(r.alpha_mass) + "," + fmt(r.l1_error) + "," +
               fmt(r.balance_residual) + "," + fmt(r.e_left) + "," + fmt(r.e_right) + "," +
               fmt(r.ratio_forward) + "," + fmt(r.ratio_reverse) + "\n";
        int ic = idx / ne, ie = idx % ne;
        std::string rho_name = "rho_c" + std::to_string(ic) + "_e" + std::to_string(ie) + ".dat";
        em.write_text(rho_name, density_dump(r.rho_eps));
        jcells.push_back({{"c", r.c},
                          {"eps", r.eps},
                          {"grid_N", r.grid_N},
                          {"lahr_eps", r.lahr_eps},
                          {"alpha_pred", r.alpha_pred},
                          {"alpha_mass", r.alpha_mass},
                          {"alpha_ratio", r.alpha_ratio},
                          {"l1_error", r.l1_error},
                          {"balance_residual", r.balance_residual},
                          {"e_left", r.e_left},
                          {"e_right", r.e_right},
                          {"ratio_forward", r.ratio_forward},
                          {"ratio_reverse", r.ratio_reverse},
                          {"matching_orientation", r.matching_orientation},
                          {"degenerate", r.degenerate},
                          {"ergodic_warning", r.ergodic_warning},
                          {"plateau_left", plateaus[idx].first},
                          {"plateau_right", plateaus[idx].second},
                          {"solver_residual", r.solver_residual},
                          {"density_file", rho_name}});
    }
    em.write_text("metastable_table.csv", csv);
    for (int ic = 0; ic < nc; ++ic) {
        const auto& r = cells[ic * ne];
        em.write_text("rho_l_c" + std::to_string(ic) + ".dat", density_dump(r.rho_l));
        em.write_text("rho_r_c" + std::to_string(ic) + ".dat", density_dump(r.rho_r));
    }

    json report;
    report["cells"] = jcells;
    json jb4 = json::array();
    for (int ic = 0; ic < nc; ++ic)
        jb4.push_back({{"c", c_list[ic]}, {"applicable", b4[ic].applicable},
                       {"pass", b4[ic].pass}});
    report["b4"] = jb4;
    em.write_json("report.json", report);

    auto limit = [&](const char* key) -> std::optional<double> {
        auto it = cfg.acceptance.find(key);
        if (it == cfg.acceptance.end()) return std::nullopt;
        return it->second;
    };
    if (auto lim = limit("l1_limit")) {
        double worst = 0.0;
        for (int ic = 0; ic < nc; ++ic) worst = std::max(worst, cells[ic * ne + ne - 1].l1_error);
        em.assert_limit("l1_limit", worst <= *lim, worst, *lim);
    }
    if (auto lim = limit("l1_decreasing")) {
        bool ok = true;
        double worst = 1.0;
        for (int ic = 0; ic < nc; ++ic)
            for (int ie = 1; ie < ne; ++ie) {
                double prev = cells[ic * ne + ie - 1].l1_error;
                double cur = cells[ic * ne + ie].l1_error;
                ok = ok && cur < prev;
                worst = std::min(worst, prev - cur);
            }
        em.assert_limit("l1_decreasing", ok, worst, *lim);
    }
    if (auto lim = limit("balance_limit")) {
        double worst = 0.0;
        for (const auto& r : cells) worst = std::max(worst, r.balance_residual);
        em.assert_limit("balance_limit", worst <= *lim, worst, *lim);
    }
    if (auto lim = limit("plateau_tol")) {
        double worst = 0.0;
        for (int ic = 0; ic < nc; ++ic) {
            int idx = ic * ne + ne - 1;
            const auto& r = cells[idx];
            if (r.alpha_pred < 1e-9 || r.alpha_pred > 1.0 - 1e-9) continue;
            double tl = 2.0 * r.alpha_pred, tr = 2.0 * (1.0 - r.alpha_pred);
            worst = std::max(worst, std::abs(plateaus[idx].first - tl) / tl);
            worst = std::max(worst, std::abs(plateaus[idx].second - tr) / tr);
        }
        em.assert_limit("plateau_tol", worst <= *lim, worst, *lim);
    }
    if (auto lim = limit("ratio_tol")) {
        double worst = 0.0;
        for (int ic = 0; ic < nc; ++ic) {
            int idx = ic * ne + ne - 1;
            const auto& r = cells[idx];
            if (r.degenerate || r.alpha_pred >= 1.0 - 1e-9) continue;
            double target = r.alpha_pred / (1.0 - r.alpha_pred);
            if (!(target > 0.0)) continue;
            double best = std::min(std::abs(r.ratio_forward - target),
                                   std::abs(r.ratio_reverse - target));
            worst = std::max(worst, best / target);
        }
        em.assert_limit("ratio_tol", worst <= *lim, worst, *lim);
    }
    return em.finish();
}

RunManifest run_mc(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate_config(cfg);
    if (!cfg.mc) throw ConfigError("config: [mc] section is required");
    Emitter em(cfg, opts);
    RngSpec rng{opts.seed.value_or(cfg.mc->seed)};

    if (cfg.map.family == "metastable") {
        double c = cfg.mc->c.value_or(cfg.map.c);
        if (!cfg.mc->eps) throw ConfigError("config: [mc] eps is required for metastable runs");
        PerturbedFamily family = make_benchmark_family(c);
        NoiseModel noise = noise_builder_from_config(cfg)(*cfg.mc->eps);
        DensityVector hist = simulate_stationary(family.map_for_omega, noise, cfg.mc->n_steps,
                                                 cfg.mc->burn_in, rng, cfg.mc->bins);
        MetastableReport rep = stationary_and_compare(family, noise, cfg.grid.N);
        DensityVector op_density = resample(rep.rho_eps, cfg.mc->bins);
        double left_mc = integrate(hist, {Interval{0.0, family.b}});
        double l1 = hist.l1_distance(op_density);
        em.write_text("histogram.dat", density_dump(hist));
        json j{{"mode", "stationary"},
               {"c", c},
               {"eps", *cfg.mc->eps},
               {"n_steps", cfg.mc->n_steps},
               {"burn_in", cfg.mc->burn_in},
               {"bins", cfg.mc->bins},
               {"seed", rng.seed},
               {"left_mass_mc", left_mc},
               {"left_mass_operator", rep.alpha_mass},
               {"l1_vs_operator", l1}};
        em.write_json("mc.json", j);
        if (auto it = cfg.acceptance.find("mass_tol"); it != cfg.acceptance.end())
            em.assert_limit("mass_tol", std::abs(left_mc - rep.alpha_mass) <= it->second,
                            std::abs(left_mc - rep.alpha_mass), it->second);
        if (auto it = cfg.acceptance.find("hist_l1_limit"); it != cfg.acceptance.end())
            em.assert_limit("hist_l1_limit", l1 <= it->second, l1, it->second);
        return em.finish();
    }

    EscapeFixture fx = fixture_from_config(cfg);
    double eps = cfg.mc->eps ? *cfg.mc->eps
                             : (cfg.noise && cfg.noise->epsilon ? *cfg.noise->epsilon : 0.0);
    if (!(eps > 0.0)) throw ConfigError("config: [mc] eps (or [noise] epsilon) is required");
    OpenSolve sol = solve_open_fixture(fx, eps);
    SurvivalCurve curve = simulate_survival(fx.map, fx.holes, sol.noise,
                                            static_cast<int>(cfg.mc->n_steps), cfg.mc->n_traj,
                                            rng, opts.jobs);
    double z = mc_vs_spectral(curve, sol.pair);
    std::string scsv = "k,survivors\n";
    std::string sdat;
    for (std::size_t k = 0; k < curve.survivors.size(); ++k) {
        scsv += std::to_string(k) + "," + std::to_string(curve.survivors[k]) + "\n";
        sdat += std::to_string(k) + " " + std::to_string(curve.survivors[k]) + "\n";
    }
    em.write_text("survival.csv", scsv);
    em.write_text("survival.dat", sdat);
    json j{{"mode", "survival"},
           {"eps", eps},
           {"lambda_hat", curve.fit.lambda_hat},
           {"stderr", curve.fit.stderr_hat},
           {"r_squared", curve.fit.r_squared},
           {"window", {curve.fit.window_lo, curve.fit.window_hi}},
           {"fit_ok", curve.fit.ok},
           {"fit_error", curve.fit.error},
           {"n_traj", curve.n_traj},
           {"seed", rng.seed},
           {"spectral_rate", sol.row.rate},
           {"z_score", z}};
    em.write_json("mc.json", j);
    if (auto it = cfg.acceptance.find("mc_z_limit"); it != cfg.acceptance.end())
        em.assert_limit("mc_z_limit", curve.fit.ok && std::abs(z) <= it->second, std::abs(z),
                        it->second);
    if (auto it = cfg.acceptance.find("r2_min"); it != cfg.acceptance.end())
        em.assert_limit("r2_min", curve.fit.ok && curve.fit.r_squared >= it->second,
                        curve.fit.r_squared, it->second);
    return em.finish();
}

RunManifest run_dump_operator(const ExperimentConfig& cfg, const RunOptions& opts,
                              const std::string& kind, const std::string& format) {
    validate_config(cfg);
    Emitter em(cfg, opts);
    std::optional<UlamOperator> op;
    if (kind == "closed") {
        PiecewiseMap map = map_from_config(cfg);
        GridPtr grid = build_grid(cfg.grid.N, map.breakpoints());
        op.emplace(build_closed(map, grid));
    } else if (kind == "open") {
        EscapeFixture fx = fixture_from_config(cfg);
        if (!cfg.noise || !cfg.noise->epsilon)
            throw ConfigError("config: [noise] epsilon is required to dump an open operator");
        NoiseModel noise = fx.noise_for_eps(*cfg.noise->epsilon);
        GridPtr grid = escape_grid(fx.map, noise, fx.holes, fx.N, fx.orbit_depth);
        op.emplace(build_open(fx.map, grid, noise, fx.holes, cfg.grid.allow_unaligned));
    } else if (kind == "averaged") {
        if (cfg.map.family != "metastable")
            throw ConfigError("config: averaged dumps need the metastable family");
        if (!cfg.noise || !cfg.noise->epsilon)
            throw ConfigError("config: [noise] epsilon is required to dump an averaged operator");
        PerturbedFamily family = make_benchmark_family(cfg.map.c);
        NoiseModel noise = noise_builder_from_config(cfg)(*cfg.noise->epsilon);
        GridPtr grid = metastable_grid(family, noise, cfg.grid.N);
        op.emplace(build_averaged_closed(family.map_for_omega, grid, noise));
    } else {
        throw ConfigError("dump-operator: kind must be closed, open or averaged");
    }
    if (format == "bin" || format == "both")
        em.write_binary("operator.bin", [&](std::ostream& os) { op->dump_binary(os); });
    if (format == "mtx" || format == "both")
        em.write_binary("operator.mtx", [&](std::ostream& os) { op->dump_mtx(os); });
    return em.finish();
}

void write_manifest_json(const RunManifest& manifest, const std::string& path) {
    json j;
    j["version"] = manifest.version;
    j["config_hash"] = manifest.config_hash;
    j["created"] = manifest.created;
    j["outputs"] = manifest.outputs;
    json ja = json::array();
    for (const auto& a : manifest.assertions)
        ja.push_back({{"name", a.name}, {"pass", a.pass}, {"value", a.value}, {"limit", a.limit}});
    j["assertions"] = ja;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest " + path);
    out << j.dump(2) << "\n";
}

}  // namespace rmaps
