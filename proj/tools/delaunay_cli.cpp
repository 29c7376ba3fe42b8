// Command-line front end. Exit codes: 0 success, 1 verification failure,
// 2 usage / validation error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "delaunay/cli.hpp"

int main(int argc, char** argv) {
    using namespace delaunay;
    cli::RunConfig cfg;

    CLI::App app{"Delaunay metrics on the cylinder: orbits, spectra, invariants"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--n", cfg.n, "model dimension (n >= 3)");
        cmd->add_option("--tol", cfg.tol_rel, "relative tolerance");
        cmd->add_option("--tol-abs", cfg.tol_abs, "absolute tolerance");
        cmd->add_option("--out", cfg.out, "output directory");
        cmd->add_option("--seed", cfg.seed, "seed for randomized sweeps");
        cmd->add_option("--workers", cfg.workers, "worker pool size");
    };

    auto* orbit = app.add_subcommand("orbit", "solve one Delaunay orbit");
    add_common(orbit);
    orbit->add_option("--eps", cfg.eps_spec, "Delaunay parameter (number or 'ubar')");
    orbit->add_flag("--export-phase", cfg.export_phase, "emit the phase portrait");

    auto* jacobi = app.add_subcommand("jacobi", "Jacobi fields phi1..phi4");
    add_common(jacobi);
    jacobi->add_option("--eps", cfg.eps_spec, "Delaunay parameter");

    auto* bands = app.add_subcommand("bands", "Floquet band structure of -L_j");
    add_common(bands);
    bands->add_option("--eps", cfg.eps_spec, "Delaunay parameter (number or 'ubar')");
    bands->add_option("--mode", cfg.mode, "spherical-harmonic degree j");
    bands->add_option("--sigma-lo", cfg.band_lo, "scan window lower end");
    bands->add_option("--sigma-hi", cfg.band_hi, "scan window upper end");
    bands->add_option("--resolution", cfg.band_resolution, "scan points");

    auto* indicial = app.add_subcommand("indicial", "Floquet exponent set");
    add_common(indicial);
    indicial->add_option("--eps", cfg.eps_spec, "Delaunay parameter");
    indicial->add_option("--jmax", cfg.jmax, "largest mode (default n + 2)");

    auto* pohozaev = app.add_subcommand("pohozaev", "invariants and c_n calibration");
    add_common(pohozaev);
    pohozaev->add_option("--eps-grid", cfg.eps_grid_spec,
                         "grid: 'a,b,c' eps values or 'lo:hi:count' ubar fractions");

    auto* relindex = app.add_subcommand("relindex", "relative index of an end configuration");
    add_common(relindex);
    relindex->add_option("--ends", cfg.ends_spec, "comma list of per-end eps values");

    auto* moduli = app.add_subcommand("moduli-table", "two-ended moduli sweep");
    add_common(moduli);
    moduli->add_option("--eps-grid", cfg.eps_grid_spec, "grid spec");

    auto* verify = app.add_subcommand("verify", "run the verification catalog");
    add_common(verify);
    verify->add_option("--only", cfg.only, "substring filter on check id/name");
    verify->add_option("--tighten", cfg.tighten, "divide every bound by this factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::vector<std::filesystem::path> written;
        if (orbit->parsed()) { cfg.command = "orbit"; written = cli::cmd_orbit(cfg); }
        else if (jacobi->parsed()) { cfg.command = "jacobi"; written = cli::cmd_jacobi(cfg); }
        else if (bands->parsed()) { cfg.command = "bands"; written = cli::cmd_bands(cfg); }
        else if (indicial->parsed()) { cfg.command = "indicial"; written = cli::cmd_indicial(cfg); }
        else if (pohozaev->parsed()) { cfg.command = "pohozaev"; written = cli::cmd_pohozaev(cfg); }
        else if (relindex->parsed()) { cfg.command = "relindex"; written = cli::cmd_relindex(cfg); }
        else if (moduli->parsed()) { cfg.command = "moduli-table"; written = cli::cmd_moduli_table(cfg); }
        else if (verify->parsed()) {
            cfg.command = "verify";
            const auto outcome = cli::cmd_verify(cfg, std::cout);
            std::printf("verify: %zu/%zu checks passed\n", outcome.passed, outcome.total);
            return outcome.exit_code;
        }
        for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
        return 0;
    } catch (const validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: bad numeric argument (%s)\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
