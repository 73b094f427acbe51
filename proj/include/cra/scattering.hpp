#pragma once

#include <complex>
#include <vector>

#include "cra/effective.hpp"

namespace cra {

struct ScatteringAmplitudes {
    double k = 0.0;
    std::complex<double> r;
    std::complex<double> t;
    std::string method_tag;
    double flux_residual = 0.0;  // | |r|^2 + |t|^2 - 1 |, single open channel
};

// Plane-wave matching through the modified region of h: ansatz
// u(j) = e^{ikj} + r e^{-ikj} on the left lead, t e^{ikj} on the right,
// E(k) = lead_onsite - 2 |lead_hop| cos k. Window half-width M = range + 8.
// Throws std::domain_error for k outside [1e-3, pi - 1e-3] and
// std::runtime_error (with a condition-number estimate in the message) when
// the bordered system is numerically singular.
ScatteringAmplitudes solve_scattering(const SingleExcitationHamiltonian& h, double k);

// The printed order-1 reflection amplitude, evaluated as printed (no
// algebraic simplification); equivalence with solve_scattering(order1) is a
// test invariant. Throws std::runtime_error on a vanishing denominator.
ScatteringAmplitudes closed_form_order1(const ModelParams& p, double k);

// Point-scatterer reflection for the deep strong coupling reduction:
// r = -V / (V - 2 i xi sin k), V = (2 Omega lambda^2/omega^2) e^{-2 lambda^2/omega^2}.
ScatteringAmplitudes closed_form_strong(const ModelParams& p, double k);

struct SweepOptions {
    int chain_length = 41;  // truncated-Fock chain for numeric methods
    int cp = 3;             // total-excitation cutoff for method "numeric"
    int jobs = 1;           // worker threads over k points
};

struct SweepPoint {
    ScatteringAmplitudes amp;
    std::string error;  // empty on success; failed points do not abort the sweep
};

// method in {order0, order1, order2, exact-grwa, rwa, strong-coupling,
// numeric, numeric-cp2, numeric-cp3}.
std::vector<SweepPoint> sweep(const ModelParams& p, const std::string& method,
                              const std::vector<double>& k_grid,
                              const SweepOptions& opts = {});

}  // namespace cra
