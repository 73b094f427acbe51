#include "cra/scattering.hpp"

#include <cmath>
#include <Eigen/Dense>

#include "cra/fock.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cra {

namespace {

using cplx = std::complex<double>;
const double kPi = std::acos(-1.0);

double hop_element(const SingleExcitationHamiltonian& h, int j, int l) {
    if (j > l) std::swap(j, l);
    auto it = h.hop.find({j, l});
    if (it != h.hop.end()) return it->second;
    return (l - j == 1) ? h.lead_hop : 0.0;
}

}  // namespace

ScatteringAmplitudes solve_scattering(const SingleExcitationHamiltonian& h, double k) {
    if (k < 1e-3 || k > kPi - 1e-3)
        throw std::domain_error("k too close to the band edge");
    if (std::abs(h.lead_hop) < 1e-300)
        throw std::domain_error("lead hop vanishes, no propagating band");

    // re-center on the TLS site so the window [-M, M] covers the modified
    // region; for a TLS at the origin this changes nothing
    int center = 0;
    if (!h.tls_coupling.empty()) {
        center = h.tls_coupling.begin()->first;
        for (const auto& [j, c] : h.tls_coupling)
            if (std::abs(c) > std::abs(h.tls_coupling.at(center))) center = j;
    } else if (!h.onsite.empty()) {
        center = h.onsite.begin()->first;
    }

    const double e = h.lead_onsite - 2.0 * std::abs(h.lead_hop) * std::cos(k);
    const int m = h.range + 8;
    const int n_sites = 2 * m + 1;
    const bool tls = !h.tls_coupling.empty();
    const int dim = n_sites + (tls ? 1 : 0) + 2;
    const int ie = n_sites;                   // TLS amplitude (if present)
    const int ir = n_sites + (tls ? 1 : 0);   // reflection amplitude
    const int it = ir + 1;                    // transmission amplitude
    auto idx = [m](int j) { return j + m; };  // site j in [-M, M]

    int span = 1;
    for (const auto& [pair, v] : h.hop) span = std::max(span, pair.second - pair.first);

    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dim);
    const cplx phase_out = std::polar(1.0, k * (m + 1));
    const cplx phase_in = std::polar(1.0, -k * (m + 1));

    for (int j = -m; j <= m; ++j) {
        const int row = idx(j);
        auto os = h.onsite.find(j + center);
        a(row, row) = (os != h.onsite.end() ? os->second : h.lead_onsite) - e;
        for (int l = j - span; l <= j + span; ++l) {
            if (l == j) continue;
            const double v = hop_element(h, j + center, l + center);
            if (v == 0.0) continue;
            if (l >= -m && l <= m) {
                a(row, idx(l)) += v;
            } else if (l == -(m + 1)) {
                a(row, ir) += v * phase_out;  // r e^{-ik l}, l = -(M+1)
                b(row) -= v * phase_in;       // incoming e^{ik l}
            } else if (l == m + 1) {
                a(row, it) += v * phase_out;
            }
        }
        if (tls) {
            auto c = h.tls_coupling.find(j + center);
            if (c != h.tls_coupling.end()) {
                a(row, ie) += c->second;
                a(ie, row) += c->second;
            }
        }
    }
    if (tls) a(ie, ie) = h.tls_level - e;

    // ansatz consistency at the window ends
    const cplx em = std::polar(1.0, k * m);
    a(ir, idx(-m)) = 1.0;
    a(ir, ir) = -em;
    b(ir) = std::conj(em);
    a(it, idx(m)) = 1.0;
    a(it, it) = -em;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-14))
        throw std::runtime_error("scattering system numerically singular (rcond = " +
                                 std::to_string(rc) + "), likely a bound-state collision");
    Eigen::VectorXcd x = lu.solve(b);

    ScatteringAmplitudes out;
    out.k = k;
    out.r = x(ir);
    out.t = x(it);
    out.method_tag = h.method_tag;
    out.flux_residual = std::abs(std::norm(out.r) + std::norm(out.t) - 1.0);
    return out;
}

ScatteringAmplitudes closed_form_order1(const ModelParams& p, double k) {
    validate(p);
    const double w = p.omega, xi = p.xi, om = p.Omega, la = p.lambda;
    const double l2 = la * la, w2 = w * w, xi2 = xi * xi;
    const cplx i(0.0, 1.0);
    const cplx eik = std::exp(i * k), e2ik = std::exp(2.0 * i * k),
               e3ik = std::exp(3.0 * i * k);
    const double ck = std::cos(k), c2k = std::cos(2.0 * k), sk = std::sin(k);

    // transcribed term by term from the first-order point-scatterer
    // elimination; deliberately not simplified
    const cplx num =
        eik * l2 * om *
        (4.0 * l2 * xi * om * om * ck +
         2.0 * std::exp(4.0 * l2 / w2) * w2 * w *
             (w2 + 2.0 * xi * w * ck - 4.0 * xi2 - 4.0 * xi2 * c2k) +
         std::exp(2.0 * l2 / w2) * om *
             (8.0 * l2 * xi2 + 2.0 * w2 * xi2 - w2 * w2 -
              4.0 * xi * w * (2.0 * l2 + w2) * ck + 2.0 * xi2 * (4.0 * l2 + w2) * c2k));

    const cplx den_t1 = -4.0 * e2ik * l2 * l2 * xi * om * om * om;
    const cplx den_t2 = std::exp(6.0 * l2 / w2) * (e2ik - 1.0) * xi * w2 * w2 * w2 *
                        (w - 2.0 * xi * ck);
    const cplx den_t3 = std::exp(4.0 * l2 / w2) * w2 * w * om *
                        (8.0 * e3ik * l2 * xi2 + 2.0 * eik * l2 * (4.0 * xi2 - w2) +
                         xi * w * (2.0 * l2 + w2) - e2ik * xi * w * (6.0 * l2 + w2));
    const cplx den_t4 = e2ik * std::exp(2.0 * l2 / w2) * l2 * om * om *
                        (4.0 * xi * w * (2.0 * l2 + w2) +
                         (w2 * w2 - 4.0 * xi2 * w2 - 16.0 * l2 * xi2) * ck -
                         i * w2 * w2 * sk);
    const cplx den = den_t1 + den_t2 + den_t3 + den_t4;

    const double scale = std::max({std::abs(den_t1), std::abs(den_t2), std::abs(den_t3),
                                   std::abs(den_t4)});
    if (std::abs(den) < 1e-12 * scale)
        throw std::runtime_error("order-1 closed form: vanishing denominator");

    ScatteringAmplitudes out;
    out.k = k;
    out.r = num / den;
    out.t = out.r + 1.0;
    out.method_tag = "order1-closed";
    out.flux_residual = std::abs(std::norm(out.r) + std::norm(out.t) - 1.0);
    return out;
}

ScatteringAmplitudes closed_form_strong(const ModelParams& p, double k) {
    validate(p);
    const double v = strong_coupling_reduction(p).effective_defect;
    const cplx den = v - cplx(0.0, 2.0 * p.xi * std::sin(k));
    if (std::abs(den) < 1e-300)
        throw std::runtime_error("strong-coupling closed form: vanishing denominator");
    ScatteringAmplitudes out;
    out.k = k;
    out.r = -v / den;
    out.t = out.r + 1.0;
    out.method_tag = "strong-closed";
    out.flux_residual = std::abs(std::norm(out.r) + std::norm(out.t) - 1.0);
    return out;
}

std::vector<SweepPoint> sweep(const ModelParams& p, const std::string& method,
                              const std::vector<double>& k_grid, const SweepOptions& opts) {
    validate(p);
    std::vector<SweepPoint> out(k_grid.size());

    int cp = 0;
    if (method == "numeric")
        cp = opts.cp;
    else if (method == "numeric-cp1")
        cp = 1;
    else if (method == "numeric-cp2")
        cp = 2;
    else if (method == "numeric-cp3")
        cp = 3;

    std::unique_ptr<NumericScatteringSolver> numeric;
    SingleExcitationHamiltonian h;
    if (cp > 0) {
        numeric = std::make_unique<NumericScatteringSolver>(p, opts.chain_length, cp);
    } else if (method == "exact-grwa") {
        h = build_exact_grwa(p, solve_alpha_closed(p));
    } else if (method == "order0") {
        h = build_order_n(p, 0);
    } else if (method == "order1") {
        h = build_order_n(p, 1);
    } else if (method == "order2") {
        h = build_order_n(p, 2);
    } else if (method == "rwa") {
        h = build_rwa(p);
    } else if (method == "strong-coupling") {
        h = strong_coupling_reduction(p).h;
    } else {
        throw std::invalid_argument("unknown method: " + method);
    }

    const std::string tag = cp > 0 ? "numeric-cp" + std::to_string(cp) : h.method_tag;
    const int n = static_cast<int>(k_grid.size());
    const int jobs = std::max(1, opts.jobs);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
#endif
    for (int i = 0; i < n; ++i) {
        try {
            out[i].amp = cp > 0 ? numeric->solve(k_grid[i]) : solve_scattering(h, k_grid[i]);
        } catch (const std::exception& ex) {
            out[i].amp.k = k_grid[i];
            out[i].error = ex.what();
        }
        out[i].amp.method_tag = tag;
    }
    return out;
}

}  // namespace cra
