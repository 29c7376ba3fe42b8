#pragma once

// =============================================================================
// Command implementations behind the `delaunay` CLI: parameter sweeps and
// table emission for orbits, Jacobi fields, band diagrams, indicial data,
// Pohozaev invariants, the relative index, the k = 2 moduli table, and the
// verification harness. CSV carries sampled data, JSON scalars and metadata;
// every artifact embeds the producing config hash. Outputs are deterministic
// for a fixed config (the JSON timestamp is the only moving field).
// =============================================================================

#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "delaunay/export.hpp"
#include "delaunay/indicial.hpp"
#include "delaunay/jacobi.hpp"
#include "delaunay/floquet.hpp"
#include "delaunay/orbit.hpp"
#include "delaunay/pohozaev.hpp"
#include "delaunay/verify.hpp"

namespace delaunay::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string command;
    int n = 4;
    std::string eps_spec = "0.5";       ///< number or "ubar"
    std::string eps_grid_spec;          ///< "a,b,c" or "lo:hi:count" (fractions of ubar)
    std::string ends_spec;              ///< comma list of per-end eps values
    int mode = 0;
    int jmax = -1;                      ///< default n + 2
    double tol_abs = 1e-12;
    double tol_rel = 1e-10;
    std::string out = ".";
    unsigned seed = 0;
    int workers = 1;
    std::string only;
    double tighten = 1.0;
    bool export_phase = false;
    double band_lo = -6.0;
    double band_hi = 4.0;
    std::size_t band_resolution = 2000;

    [[nodiscard]] double eps_value() const {
        if (eps_spec == "ubar") return equilibrium_ubar(n);
        return std::stod(eps_spec);
    }
    [[nodiscard]] int jmax_value() const { return jmax < 0 ? n + 2 : jmax; }
    [[nodiscard]] Tolerance tolerance() const { return {tol_abs, tol_rel}; }

    void validate() const {
        validate_dimension(n);
        tolerance().validate();
        if (workers < 1) throw validation_error("workers must be >= 1");
        if (command == "orbit" || command == "jacobi" || command == "bands" ||
            command == "indicial" || command == "pohozaev") {
            const double e = eps_value();
            if (!(e > 0.0) || e > equilibrium_ubar(n) + 1e-12)
                throw validation_error("eps must lie in (0, ubar]");
        }
        if (command == "bands" && !(band_hi > band_lo))
            throw validation_error("band window must be nonempty");
        if (command == "relindex" && ends_spec.empty())
            throw validation_error("relindex requires --ends");
    }

    /// Canonical serialization used for the provenance hash (excludes
    /// anything time-dependent).
    [[nodiscard]] std::string canonical() const {
        std::ostringstream s;
        s << "cmd=" << command << ";n=" << n << ";eps=" << eps_spec
          << ";grid=" << eps_grid_spec << ";ends=" << ends_spec << ";mode=" << mode
          << ";jmax=" << jmax << ";tol=" << format_double(tol_abs) << ","
          << format_double(tol_rel) << ";seed=" << seed << ";only=" << only
          << ";tighten=" << format_double(tighten) << ";phase=" << export_phase
          << ";band=" << format_double(band_lo) << "," << format_double(band_hi) << ","
          << band_resolution << ";version=" << kVersion;
        return s.str();
    }
    [[nodiscard]] std::string hash() const { return fnv1a_hex(canonical()); }
};

namespace detail {

[[nodiscard]] inline std::vector<double> parse_number_list(const std::string& spec) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(std::stod(token));
    }
    return out;
}

/// eps grid from the spec string: explicit "a,b,c" values, or "lo:hi:count"
/// fractions of ubar; empty means the default 19-point fraction grid.
[[nodiscard]] inline std::vector<double> eps_grid(const RunConfig& cfg) {
    const double ub = equilibrium_ubar(cfg.n);
    if (cfg.eps_grid_spec.empty()) {
        std::vector<double> g;
        for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i * ub);
        return g;
    }
    if (cfg.eps_grid_spec.find(':') != std::string::npos) {
        double lo, hi;
        std::size_t count;
        if (std::sscanf(cfg.eps_grid_spec.c_str(), "%lf:%lf:%zu", &lo, &hi, &count) != 3)
            throw validation_error("bad --eps-grid spec: " + cfg.eps_grid_spec);
        std::vector<double> g;
        for (double f : linspace(lo, hi, count)) g.push_back(f * ub);
        return g;
    }
    return parse_number_list(cfg.eps_grid_spec);
}

[[nodiscard]] inline nlohmann::json provenance(const RunConfig& cfg) {
    nlohmann::json j;
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.canonical();
    j["version"] = kVersion;
    j["tolerances"] = {{"abs", cfg.tol_abs}, {"rel", cfg.tol_rel}};
    j["seed"] = cfg.seed;
    const auto now = std::chrono::system_clock::now();
    j["generated_unix_time"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

}  // namespace detail

// =============================================================================
// orbit
// =============================================================================

inline std::vector<std::filesystem::path> cmd_orbit(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    const auto orbit = solve_orbit(cfg.n, cfg.eps_value(), cfg.tolerance());

    CsvTable table;
    table.comments = {"config_hash=" + cfg.hash(), "columns: t,u,v,r"};
    table.columns = {"t", "u", "v", "r"};
    for (double t : linspace(0.0, orbit.T, 512))
        table.rows.push_back({t, orbit.u(t), orbit.v(t), orbit.r_of_t(t)});
    write_csv(dir / "orbit.csv", table);
    written.push_back(dir / "orbit.csv");

    nlohmann::json head = detail::provenance(cfg);
    head["n"] = orbit.n;
    head["eps"] = orbit.eps;
    head["T"] = orbit.T;
    head["R"] = orbit.R;
    head["H"] = orbit.H;
    head["u_max"] = orbit.u_max;
    head["equilibrium"] = orbit.equilibrium;
    head["h_drift"] = orbit.h_drift;
    detail::write_json(dir / "orbit.json", head);
    written.push_back(dir / "orbit.json");

    if (cfg.export_phase) {
        CsvTable phase;
        phase.comments = {"config_hash=" + cfg.hash(),
                          "curve 0: orbit; curve 1: homoclinic loop; curves 2+: "
                          "other energy level sets"};
        phase.columns = {"curve", "u", "v"};
        for (double t : linspace(0.0, orbit.T, 512))
            phase.rows.push_back({0.0, orbit.u(t), orbit.v(t)});
        for (double t : linspace(-8.0, 8.0, 512))
            phase.rows.push_back(
                {1.0, homoclinic_u0(cfg.n, t), homoclinic_u0_prime(cfg.n, t)});
        int curve = 2;
        for (double f : {0.25, 0.5, 0.75}) {
            const double e = f * equilibrium_ubar(cfg.n);
            const auto level = solve_orbit(cfg.n, e, cfg.tolerance());
            for (double t : linspace(0.0, level.T, 256))
                phase.rows.push_back({static_cast<double>(curve), level.u(t), level.v(t)});
            ++curve;
        }
        write_csv(dir / "phase.csv", phase);
        written.push_back(dir / "phase.csv");
    }
    return written;
}

// =============================================================================
// jacobi
// =============================================================================

inline std::vector<std::filesystem::path> cmd_jacobi(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    const auto orbit = solve_orbit(cfg.n, cfg.eps_value(), cfg.tolerance());
    const auto f1 = phi1(orbit);
    const auto f2 = phi2(orbit);
    const auto f3 = phi3(orbit);
    const auto f4 = phi4(orbit);

    nlohmann::json meta = detail::provenance(cfg);
    meta["n"] = orbit.n;
    meta["eps"] = orbit.eps;
    for (const JacobiField* f : {&f1, &f2, &f3, &f4}) {
        nlohmann::json jf;
        jf["kind"] = to_string(f->kind);
        jf["mode"] = f->mode;
        jf["growth_class"] = to_string(f->growth);
        jf["residual_sup_2T"] = jacobi_residual_sup(*f, 0.0, 2.0 * orbit.T);
        meta["fields"].push_back(jf);
    }
    auto w12 = wronskian_pairing(f1, f2, 0.0, 2.0 * orbit.T);
    auto [mean, dev] = constancy(w12);
    meta["wronskian_phi1_phi2"] = {{"mean", mean}, {"max_deviation", dev}};
    detail::write_json(dir / "jacobi.json", meta);

    CsvTable table;
    table.comments = {"config_hash=" + cfg.hash()};
    table.columns = {"t", "phi1", "phi2", "phi3", "phi4"};
    for (double t : linspace(0.0, 2.0 * orbit.T, 512))
        table.rows.push_back({t, f1.value(t), f2.value(t), f3.value(t), f4.value(t)});
    write_csv(dir / "jacobi.csv", table);
    return {dir / "jacobi.json", dir / "jacobi.csv"};
}

// =============================================================================
// bands
// =============================================================================

inline std::vector<std::filesystem::path> cmd_bands(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    const auto orbit = solve_orbit(cfg.n, cfg.eps_value(), cfg.tolerance());
    BandOptions opts;
    opts.resolution = cfg.band_resolution;
    const auto bands =
        band_structure(sl_form(orbit, cfg.mode), cfg.band_lo, cfg.band_hi, opts);

    const std::string stem = "bands_mode" + std::to_string(cfg.mode);
    CsvTable table;
    table.comments = {"config_hash=" + cfg.hash(),
                      "discriminant of -L_j over the scan window"};
    table.columns = {"sigma", "discriminant"};
    for (std::size_t i = 0; i < bands.scan_sigma.size(); ++i)
        table.rows.push_back({bands.scan_sigma[i], bands.scan_discriminant[i]});
    write_csv(dir / (stem + ".csv"), table);

    nlohmann::json meta = detail::provenance(cfg);
    meta["n"] = orbit.n;
    meta["eps"] = orbit.eps;
    meta["mode"] = {{"j", bands.mode.j},
                    {"lambda", bands.mode.lambda},
                    {"multiplicity", bands.mode.multiplicity}};
    meta["window"] = {cfg.band_lo, cfg.band_hi};
    for (const auto& b : bands.bands) meta["bands"].push_back({b.lo, b.hi});
    meta["gaps"] = nlohmann::json::array();
    for (const auto& g : bands.gaps) meta["gaps"].push_back({g.lo, g.hi});
    detail::write_json(dir / (stem + ".json"), meta);
    return {dir / (stem + ".csv"), dir / (stem + ".json")};
}

// =============================================================================
// indicial
// =============================================================================

inline std::vector<std::filesystem::path> cmd_indicial(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    const auto orbit = solve_orbit(cfg.n, cfg.eps_value(), cfg.tolerance());
    const auto set = indicial_set(orbit, cfg.jmax_value());

    nlohmann::json meta = detail::provenance(cfg);
    meta["n"] = orbit.n;
    meta["eps"] = orbit.eps;
    meta["j_max"] = cfg.jmax_value();
    meta["gamma1"] = set.gamma1;
    for (const auto& e : set.entries)
        meta["entries"].push_back({{"mode", e.mode},
                                   {"gamma", e.gamma},
                                   {"multiplicity", e.multiplicity},
                                   {"defective", e.defective}});
    detail::write_json(dir / "indicial.json", meta);

    CsvTable table;
    table.comments = {"config_hash=" + cfg.hash()};
    table.columns = {"mode", "gamma", "multiplicity", "defective"};
    for (const auto& e : set.entries)
        table.rows.push_back({static_cast<double>(e.mode), e.gamma,
                              static_cast<double>(e.multiplicity),
                              e.defective ? 1.0 : 0.0});
    write_csv(dir / "indicial.csv", table);
    return {dir / "indicial.json", dir / "indicial.csv"};
}

// =============================================================================
// pohozaev
// =============================================================================

inline std::vector<std::filesystem::path> cmd_pohozaev(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    const auto grid = detail::eps_grid(cfg);
    const auto cal = calibrate_cn(cfg.n, grid, cfg.tolerance());

    nlohmann::json jc = detail::provenance(cfg);
    jc["n"] = cal.n;
    jc["c_n"] = cal.c_n;
    jc["max_relative_deviation"] = cal.max_relative_deviation;
    jc["grid"] = cal.grid;
    detail::write_json(dir / "calibration.json", jc);

    CsvTable table;
    table.comments = {"config_hash=" + cfg.hash()};
    table.columns = {"eps", "H", "D", "killing_norm2"};
    for (double eps : grid) {
        const auto orbit = solve_orbit(cfg.n, eps, cfg.tolerance());
        const auto P = invariant_functional(orbit, 0.31 * orbit.T);
        table.rows.push_back({eps, orbit.H, P.dilational, invariant_norm_squared(P)});
    }
    write_csv(dir / "pohozaev.csv", table);
    return {dir / "calibration.json", dir / "pohozaev.csv"};
}

// =============================================================================
// relindex
// =============================================================================

inline std::vector<std::filesystem::path> cmd_relindex(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    EndModel ends{cfg.n, detail::parse_number_list(cfg.ends_spec)};
    const auto res = relative_index(ends, cfg.tolerance());

    nlohmann::json j = detail::provenance(cfg);
    j["n"] = cfg.n;
    j["ends"] = ends.eps;
    j["rel_index"] = res.rel_index;
    j["dim_B"] = res.dim_bounded_nullspace;
    j["delta"] = res.delta;
    detail::write_json(dir / "relindex.json", j);
    return {dir / "relindex.json"};
}

// =============================================================================
// moduli-table
// =============================================================================

inline std::vector<std::filesystem::path> cmd_moduli_table(const RunConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    const auto grid = detail::eps_grid(cfg);
    std::vector<std::vector<double>> rows(grid.size());

    // embarrassingly parallel sweep; results land in index order so the
    // output is deterministic regardless of worker count
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto orbit = solve_orbit(cfg.n, grid[i], cfg.tolerance());
            const auto P = invariant_functional(orbit, 0.31 * orbit.T);
            rows[i] = {grid[i],        orbit.T,      orbit.R,
                       orbit.H,        P.dilational, invariant_norm_squared(P)};
        }
    };
    const std::size_t nw = std::min<std::size_t>(cfg.workers, grid.size());
    if (nw <= 1) {
        work(0, grid.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (grid.size() + nw - 1) / nw;
        for (std::size_t w = 0; w < nw; ++w)
            pool.emplace_back(work, w * chunk,
                              std::min(grid.size(), (w + 1) * chunk));
        for (auto& th : pool) th.join();
    }

    CsvTable table;
    table.comments = {"config_hash=" + cfg.hash(),
                      "two-ended moduli sweep: one row per Delaunay parameter"};
    table.columns = {"eps", "T", "R", "H", "D", "killing_norm2"};
    table.rows = std::move(rows);
    write_csv(dir / "moduli.csv", table);
    return {dir / "moduli.csv"};
}

// =============================================================================
// fit reports
// =============================================================================

/// JSON schema for asymptote-fit results (misfit diagnostics included).
[[nodiscard]] inline nlohmann::json fit_report_json(const AsymptoteFit& fit) {
    return {{"eps", fit.eps},        {"eta", fit.eta},
            {"c", fit.c},            {"alpha", fit.alpha},
            {"misfit", fit.misfit},  {"converged", fit.converged},
            {"iterations", fit.iterations}};
}

// =============================================================================
// verify
// =============================================================================

struct VerifyOutcome {
    int exit_code = 0;
    std::size_t passed = 0, total = 0;
};

inline VerifyOutcome cmd_verify(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);

    VerifyOptions opts;
    opts.tighten = cfg.tighten;
    opts.only = cfg.only;
    const auto results = run_verification(opts);

    nlohmann::json rep = detail::provenance(cfg);
    VerifyOutcome outcome;
    outcome.total = results.size();
    for (const auto& r : results) {
        rep["checks"].push_back({{"id", r.id},
                                 {"name", r.name},
                                 {"measured", r.measured},
                                 {"bound", r.bound},
                                 {"pass", r.pass}});
        if (r.pass) ++outcome.passed;
        log << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name
            << "  measured=" << format_double(r.measured)
            << " bound=" << format_double(r.bound) << "\n";
    }
    rep["passed"] = outcome.passed;
    rep["total"] = outcome.total;
    detail::write_json(dir / "report.json", rep);
    outcome.exit_code = (outcome.passed == outcome.total && outcome.total > 0) ? 0 : 1;
    return outcome;
}

}  // namespace delaunay::cli
