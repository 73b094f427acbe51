#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cra {

// One two-level system coupled to a 1D coupled-resonator array.
// Energies are in units where hbar = 1; omega sets the overall scale.
struct ModelParams {
    double omega = 1.0;   // bare resonator frequency
    double xi = 0.0;      // nearest-neighbour photon hop
    double Omega = 0.0;   // TLS splitting
    double lambda = 0.0;  // TLS-resonator coupling
    std::vector<int> tls_sites = {0};
};

struct BandInfo {
    double center;      // N * omega for the N-photon band
    double half_width;  // 2 * N * |xi|
    int n_photons;
};

// E(k) = omega - 2 xi cos k for the one-photon band, k in (0, pi).
double dispersion(const ModelParams& p, double k);

BandInfo band_info(const ModelParams& p, int n_photons);

// Throws std::invalid_argument when the polaron treatment breaks down
// (|xi| >= omega/2 puts the band edge at zero) or parameters are nonsensical.
void validate(const ModelParams& p);

// True when |xi| > omega/4; downstream truncations converge slowly there.
bool wide_band_warning(const ModelParams& p);

}  // namespace cra
