#pragma once

#include <iosfwd>
#include <optional>

#include "cra/rabi.hpp"
#include "cra/scattering.hpp"

namespace cra {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "CRA_SCATTER_OUTDIR";

struct KGrid {
    int count = 200;
    double kmin = 0.0;  // 0 means "default interior band", resolved at run time
    double kmax = 0.0;
    std::vector<double> points() const;
};

struct RunConfig {
    ModelParams model;
    std::vector<std::string> methods = {"order1"};
    KGrid grid;
    std::string out;             // empty: data table to stdout, no sidecar
    std::string format = "csv";  // csv | json
    int cp = 3;
    int chain_length = 41;
    int jobs = 1;
    bool quick = false;
    int rabi_levels = 8;
    std::string preset;  // name recorded in metadata when one was applied
};

struct SweepRow {
    double k;
    std::string method;
    std::complex<double> r, t;
    double refl_prob;       // |r|^2, always re_r^2 + im_r^2 of the stored r
    double flux_residual;
    std::string error;
};

// Thrown for malformed configuration (unknown keys, bad values); the CLI maps
// it to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);  // throws ConfigError

// Merge keys from a JSON config file into cfg; unknown keys are hard errors.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Applies kOutDirEnv to relative output paths.
std::string resolve_out_path(const std::string& out);

std::vector<SweepRow> collect_sweep_rows(const RunConfig& cfg);

void write_rows_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_rows_json(const std::vector<SweepRow>& rows, std::ostream& out);

// Exit codes: 0 ok, 1 config error, 2 completed with per-point failures,
// 3 validation failure.
int run_sweep(const RunConfig& cfg, std::ostream& log);
int run_alpha(const RunConfig& cfg, std::ostream& out);
int run_bands(const RunConfig& cfg, std::ostream& out);
int run_rabi(const RunConfig& cfg, std::ostream& out);
int run_validate(const RunConfig& cfg, bool inject_fault, std::ostream& log);

}  // namespace cra
