#pragma once

#include <string>
#include <vector>

#include "cra/model.hpp"

namespace cra {

// Single-mode quantum Rabi model H = omega a^dag a + (Omega/2) sigma_z
//                                   + lambda sigma_x (a^dag + a).
struct RabiParams {
    double omega = 1.0;
    double Omega = 1.0;
    double lambda = 0.0;
    int cutoff = 120;  // photon-number truncation; grown automatically
};

struct SpectrumResult {
    std::string method_tag;          // exact | jc | adiabatic | grwa
    std::vector<double> levels;      // ascending
    double convergence = 0.0;        // max level shift under cutoff doubling
};

// Parity-blocked dense diagonalization; the cutoff is doubled until the
// requested levels move by less than 1e-10 (convergence reported).
SpectrumResult rabi_exact(const RabiParams& p, int n_levels);

// Jaynes-Cummings: singlet |g,0> at -Omega/2 plus 2x2 blocks (|g,n>, |e,n-1>).
SpectrumResult rabi_jc(const RabiParams& p, int n_levels);

// Adiabatic displaced-oscillator doublets:
// E_{pm,n} = omega (n - lambda^2/omega^2) +- (Omega/2) <n|D(2 lambda/omega)|n>.
SpectrumResult rabi_adiabatic(const RabiParams& p, int n_levels);

// Generalized RWA: adiabatic basis, singlet E_{-,0} plus 2x2 blocks coupling
// |Psi_-,n> and |Psi_+,n-1> with (Omega/2) <n|D(2 lambda/omega)|n-1>.
SpectrumResult rabi_grwa(const RabiParams& p, int n_levels);

int minimum_cutoff(const RabiParams& p);  // 20 + ceil(10 (lambda/omega)^2)

}  // namespace cra
