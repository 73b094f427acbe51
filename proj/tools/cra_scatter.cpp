// cra_scatter: command-line front end for the coupled-resonator-array
// scattering library. See `cra_scatter --help` and README.md.
#include <CLI11.hpp>
#include <iostream>

#include "cra/sweep.hpp"

namespace {

struct Cli {
    cra::RunConfig cfg;
    std::string config_path;
    std::string preset;
    std::string methods_csv;
    bool inject_fault = false;
};

// Precedence: defaults < preset < config file < explicit flags.
void finalize(Cli& cli, const CLI::App& cmd) {
    cra::RunConfig base;
    if (!cli.preset.empty()) base = cra::preset_config(cli.preset);
    if (!cli.config_path.empty()) cra::apply_config_file(base, cli.config_path);

    const auto flag_given = [&](const std::string& name) {
        const CLI::Option* opt = cmd.get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    if (!flag_given("--omega")) cli.cfg.model.omega = base.model.omega;
    if (!flag_given("--xi")) cli.cfg.model.xi = base.model.xi;
    if (!flag_given("--Omega")) cli.cfg.model.Omega = base.model.Omega;
    if (!flag_given("--lambda")) cli.cfg.model.lambda = base.model.lambda;
    if (!flag_given("--tls-site")) cli.cfg.model.tls_sites = base.model.tls_sites;
    if (!flag_given("--k-points")) cli.cfg.grid.count = base.grid.count;
    if (!flag_given("--kmin")) cli.cfg.grid.kmin = base.grid.kmin;
    if (!flag_given("--kmax")) cli.cfg.grid.kmax = base.grid.kmax;
    if (!flag_given("--out")) cli.cfg.out = base.out;
    if (!flag_given("--format")) cli.cfg.format = base.format;
    if (!flag_given("--cp")) cli.cfg.cp = base.cp;
    if (!flag_given("--chain-length")) cli.cfg.chain_length = base.chain_length;
    if (!flag_given("--jobs")) cli.cfg.jobs = base.jobs;
    if (!flag_given("--quick")) cli.cfg.quick = base.quick;
    if (!flag_given("--rabi-levels")) cli.cfg.rabi_levels = base.rabi_levels;
    if (flag_given("--method")) {
        cli.cfg.methods.clear();
        std::stringstream ss(cli.methods_csv);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) cli.cfg.methods.push_back(tok);
    } else {
        cli.cfg.methods = base.methods;
    }
    cli.cfg.preset = cli.preset.empty() ? base.preset : cli.preset;
    cra::validate(cli.cfg.model);
    if (cra::wide_band_warning(cli.cfg.model))
        std::cerr << "warning: |xi| > omega/4, band approaches the multi-photon overlap "
                     "regime\n";
}

void add_common(CLI::App& cmd, Cli& cli) {
    cmd.add_option("--config", cli.config_path, "JSON config file; unknown keys are errors");
    cmd.add_option("--preset", cli.preset, "named parameter set, see `presets`");
    cmd.add_option("--omega", cli.cfg.model.omega, "resonator frequency");
    cmd.add_option("--xi", cli.cfg.model.xi, "nearest-neighbour hopping");
    cmd.add_option("--Omega", cli.cfg.model.Omega, "TLS level splitting");
    cmd.add_option("--lambda", cli.cfg.model.lambda, "TLS-resonator coupling");
    cmd.add_option("--tls-site", cli.cfg.model.tls_sites, "TLS site index (repeatable)");
    cmd.add_option("--k-points", cli.cfg.grid.count, "number of wavevector samples");
    cmd.add_option("--kmin", cli.cfg.grid.kmin, "lowest wavevector (radians)");
    cmd.add_option("--kmax", cli.cfg.grid.kmax, "highest wavevector (radians)");
    cmd.add_option("--out", cli.cfg.out, "output file (default stdout); relative paths "
                                         "honour CRA_SCATTER_OUTDIR");
    cmd.add_option("--format", cli.cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("--cp", cli.cfg.cp, "total excitation cutoff of the numeric solver")
        ->check(CLI::Range(1, 3));
    cmd.add_option("--chain-length", cli.cfg.chain_length,
                   "resonator count for the numeric solver (odd)");
    cmd.add_option("--jobs", cli.cfg.jobs, "worker threads for sweeps");
    cmd.add_flag("--quick", cli.cfg.quick, "skip the slowest numeric checks");
    cmd.add_option("--rabi-levels", cli.cfg.rabi_levels, "levels printed by `rabi`");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-photon scattering on a coupled resonator array with an "
                 "ultrastrongly coupled two-level system"};
    app.set_version_flag("--version", cra::kVersion);
    app.require_subcommand(1);

    Cli cli;
    CLI::App* sweep = app.add_subcommand("sweep", "scattering amplitudes over a k grid");
    sweep->add_option("--method", cli.methods_csv,
                      "comma list: order0,order1,order2,exact-grwa,rwa,strong-coupling,"
                      "numeric,numeric-cp2,numeric-cp3");
    add_common(*sweep, cli);
    CLI::App* alpha = app.add_subcommand("alpha", "polaron displacement profile");
    add_common(*alpha, cli);
    CLI::App* bands = app.add_subcommand("bands", "photon band edges and adiabatic bands");
    add_common(*bands, cli);
    CLI::App* rabi = app.add_subcommand("rabi", "quantum Rabi benchmark spectra");
    add_common(*rabi, cli);
    CLI::App* validate = app.add_subcommand("validate", "internal consistency checks");
    validate->add_flag("--inject-fault", cli.inject_fault,
                       "deliberately perturb one coefficient; validation must fail");
    add_common(*validate, cli);
    CLI::App* presets = app.add_subcommand("presets", "list named parameter sets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (presets->parsed()) {
            for (const auto& name : cra::preset_names()) {
                cra::RunConfig c = cra::preset_config(name);
                std::printf("%-6s omega=%g xi=%g Omega=%g lambda=%g methods=", name.c_str(),
                            c.model.omega, c.model.xi, c.model.Omega, c.model.lambda);
                for (size_t i = 0; i < c.methods.size(); ++i)
                    std::printf("%s%s", i ? "," : "", c.methods[i].c_str());
                std::printf("\n");
            }
            return 0;
        }
        CLI::App* active = app.get_subcommands().front();
        finalize(cli, *active);
        if (sweep->parsed()) return cra::run_sweep(cli.cfg, std::cerr);
        if (alpha->parsed()) return cra::run_alpha(cli.cfg, std::cout);
        if (bands->parsed()) return cra::run_bands(cli.cfg, std::cout);
        if (rabi->parsed()) return cra::run_rabi(cli.cfg, std::cout);
        if (validate->parsed()) return cra::run_validate(cli.cfg, cli.inject_fault, std::cout);
    } catch (const cra::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
