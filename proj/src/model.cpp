#include "cra/model.hpp"

#include <cmath>

namespace cra {

double dispersion(const ModelParams& p, double k) {
    return p.omega - 2.0 * p.xi * std::cos(k);
}

BandInfo band_info(const ModelParams& p, int n_photons) {
    return {n_photons * p.omega, 2.0 * n_photons * std::abs(p.xi), n_photons};
}

void validate(const ModelParams& p) {
    if (!(p.omega > 0.0))
        throw std::invalid_argument("omega must be positive");
    if (!std::isfinite(p.xi) || !std::isfinite(p.Omega) || !std::isfinite(p.lambda))
        throw std::invalid_argument("non-finite model parameter");
    if (p.Omega < 0.0)
        throw std::invalid_argument("Omega must be non-negative");
    if (std::abs(p.xi) >= 0.5 * p.omega)
        throw std::invalid_argument(
            "|xi| >= omega/2: one-photon band reaches zero energy, "
            "polaron profile diverges");
    if (p.tls_sites.empty())
        throw std::invalid_argument("need at least one TLS site");
}

bool wide_band_warning(const ModelParams& p) {
    return std::abs(p.xi) > 0.25 * p.omega;
}

}  // namespace cra
