#pragma once

#include <map>
#include <string>
#include <utility>

#include "cra/polaron.hpp"

namespace cra {

// One-excitation effective Hamiltonian after the polaron rotation, measured
// from the dressed ground level -(Omega/2) G. Finite "scattering region" of
// modified elements embedded in an ideal lead on each side.
struct SingleExcitationHamiltonian {
    std::map<int, double> onsite;                  // site -> diagonal energy
    std::map<std::pair<int, int>, double> hop;     // (j,l), j < l -> amplitude
    double tls_level = 0.0;                        // dressed |0,e> energy
    std::map<int, double> tls_coupling;            // site -> TLS hybridization
    double lead_onsite = 0.0;                      // omega
    double lead_hop = 0.0;                         // -xi
    int range = 0;                                 // modified elements live in |j| <= range
    std::string method_tag;
};

// Printed low-order GRWA coefficients (G0 = exp(-2 lambda^2/omega^2)):
//   w0g  = -(Omega/2) G0                     zero-excitation ground
//   w0e  = +(Omega/2) G0                     dressed TLS level
//   w1g0 = -(Omega/2) G0 (1 - 4 lambda^2/omega^2)   photon-at-TLS-site shift
//   j0   = (Omega lambda / omega) G0         on-site hybridization
//   w1g1 = (2 Omega lambda^2 xi / omega^3) G0  NN hop dressing
//   j1   = (Omega lambda xi / omega^2) G0    NN hybridization
struct Order1Coefficients {
    double w0g, w0e, w1g0, j0, w1g1, j1;
};

Order1Coefficients order1_coefficients(const ModelParams& p);

// All matrix elements of the rotated one-excitation block, no expansion:
//   onsite(j)       = omega + (Omega/2) beta_j^2 G
//   hop(j,l)        = -xi [|j-l|=1] + (Omega/2) beta_j beta_l G
//   tls_level       = Omega G
//   tls_coupling(l) = (Omega/2) beta_l G
SingleExcitationHamiltonian build_exact_grwa(const ModelParams& p,
                                             const PolaronAmplitudes& pa);

// Taylor truncation of the exact elements at (xi/omega)^n, n in {0,1,2}.
// n <= 1 is assembled from order1_coefficients; n = 2 differentiates the
// exact elements numerically (central differences, step xi/16, one Richardson
// refinement) because the spec-level definition of order 2 is exactly that
// truncated series. Bare NN lead hop -xi is kept exact at every order.
SingleExcitationHamiltonian build_order_n(const ModelParams& p, int n);

// Plain rotating-wave approximation (no polaron dressing): free chain,
// tls_level = Omega, tls_coupling(0) = lambda.
SingleExcitationHamiltonian build_rwa(const ModelParams& p);

// Deep strong coupling point scatterer: single effective on-site defect
// w1g0_strong = (2 Omega lambda^2 / omega^2) exp(-2 lambda^2 / omega^2) at the
// TLS site, no TLS channel. warn flags the regime where the TLS level has
// collapsed into the band ((lambda^2/omega^2) G0 > 0.05 heuristic inverted:
// warn when the reduction is *not* trustworthy).
struct StrongCouplingReduction {
    SingleExcitationHamiltonian h;
    double effective_defect = 0.0;
    bool warn = false;
};

StrongCouplingReduction strong_coupling_reduction(const ModelParams& p);

// Upper/lower polariton band energies in the adiabatic (slow-TLS) picture:
// E_pm(k) = omega - 2 xi cos k +- (Omega/2) (1 - bhat(k)^2) G,
// bhat(k) = sum_j beta_j e^{ikj}.
std::pair<double, double> adiabatic_band_energies(const ModelParams& p,
                                                  const PolaronAmplitudes& pa,
                                                  double k);

}  // namespace cra
