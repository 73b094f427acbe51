#pragma once

#include <map>

#include "cra/model.hpp"

namespace cra {

// Site-resolved displacement profile of the polaron rotation
// U = exp(sigma_x * sum_j alpha_j (a_j^dag - a_j)).
struct PolaronAmplitudes {
    std::map<int, double> alphas;  // site j -> alpha_j, |j - c| <= range
    double omega1 = 0.0;           // (omega + sqrt(omega^2 - 4 xi^2)) / 2
    double decay_ratio = 0.0;      // q = xi / omega1, |alpha_{j+1}/alpha_j|
    int range = 0;                 // largest |j - c| kept
    double trunc_tol = 0.0;        // relative cutoff used for the window
};

// beta_j = -2 alpha_j; the displacement vector entering the rotated TLS term.
struct DisplacementVector {
    std::map<int, double> betas;
    double gaussian_factor = 0.0;  // G = exp(-sum_j beta_j^2 / 2)
};

struct IntegralCheck {
    double lhs;  // (lambda / 2pi) Int dk e^{ikj} / (omega - 2 xi cos k)
    double rhs;  // lambda omega1 / (omega omega1 - 2 xi^2) * q^|j|
    double residual;
};

// Closed-form geometric profile alpha_j = A q^{|j-c|}; window chosen so the
// dropped tail is below trunc_tol relative to alpha_0. xi = 0 collapses to a
// single site.
PolaronAmplitudes solve_alpha_closed(const ModelParams& p, double trunc_tol = 1e-12);

// Independent construction: solve the defining linear system on sites
// [-N, N] with hard-wall ends. Used to cross-check the closed form.
PolaronAmplitudes solve_alpha_recursion(const ModelParams& p, int n_sites);

// Superposition of single-TLS profiles, one per entry of p.tls_sites.
PolaronAmplitudes solve_alpha_multi(const ModelParams& p, double trunc_tol = 1e-12);

// Quadrature check of the momentum-integral representation of alpha_j.
IntegralCheck integral_identity_check(const ModelParams& p, int j);

// <m| exp(beta (a^dag - a)) |n>, exact finite sum.
double displacement_overlap(int m, int n, double beta);

DisplacementVector displacement_vector(const PolaronAmplitudes& pa);

// exp(-2 sum_j alpha_j^2)
double gaussian_factor(const PolaronAmplitudes& pa);

}  // namespace cra
