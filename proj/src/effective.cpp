#include "cra/effective.hpp"

#include <cmath>

namespace cra {

namespace {

constexpr double kDropTol = 1e-18;

void put_hop(SingleExcitationHamiltonian& h, int j, int l, double v) {
    if (j > l) std::swap(j, l);
    h.hop[{j, l}] = v;
}

SingleExcitationHamiltonian lead_skeleton(const ModelParams& p, const char* tag) {
    SingleExcitationHamiltonian h;
    h.lead_onsite = p.omega;
    h.lead_hop = -p.xi;
    h.method_tag = tag;
    return h;
}

// Dressed matrix elements relative to the lead, on the window |j-c| <= span,
// as plain arrays indexed by j-c. Used by the order-2 finite differences.
struct DressedElements {
    static constexpr int span = 2;
    double onsite[2 * span + 1] = {};                    // minus omega
    double hop[2 * span + 1][2 * span + 1] = {};         // minus bare -xi on NN
    double tls_coupling[2 * span + 1] = {};
    double tls_level = 0.0;
};

DressedElements dressed_at(const ModelParams& p) {
    DressedElements e;
    PolaronAmplitudes pa = solve_alpha_closed(p, 1e-16);
    SingleExcitationHamiltonian h = build_exact_grwa(p, pa);
    const int c = p.tls_sites.at(0), s = DressedElements::span;
    for (int a = -s; a <= s; ++a) {
        auto it = h.onsite.find(c + a);
        if (it != h.onsite.end()) e.onsite[a + s] = it->second - p.omega;
        auto jt = h.tls_coupling.find(c + a);
        if (jt != h.tls_coupling.end()) e.tls_coupling[a + s] = jt->second;
        for (int b = a + 1; b <= s; ++b) {
            auto ht = h.hop.find({c + a, c + b});
            double v = (ht != h.hop.end()) ? ht->second : (b - a == 1 ? -p.xi : 0.0);
            if (b - a == 1) v += p.xi;  // strip the bare hop
            e.hop[a + s][b + s] = v;
        }
    }
    e.tls_level = h.tls_level;
    return e;
}

}  // namespace

Order1Coefficients order1_coefficients(const ModelParams& p) {
    validate(p);
    const double r = p.lambda / p.omega;
    const double g0 = std::exp(-2.0 * r * r);
    Order1Coefficients c;
    c.w0g = -0.5 * p.Omega * g0;
    c.w0e = 0.5 * p.Omega * g0;
    c.w1g0 = -0.5 * p.Omega * g0 * (1.0 - 4.0 * r * r);
    c.j0 = p.Omega * r * g0;
    c.w1g1 = 2.0 * p.Omega * r * r * (p.xi / p.omega) * g0;
    c.j1 = p.Omega * r * (p.xi / p.omega) * g0;
    return c;
}

SingleExcitationHamiltonian build_exact_grwa(const ModelParams& p,
                                             const PolaronAmplitudes& pa) {
    validate(p);
    SingleExcitationHamiltonian h = lead_skeleton(p, "exact-grwa");
    const DisplacementVector dv = displacement_vector(pa);
    const double g = dv.gaussian_factor;
    const double c2 = 0.5 * p.Omega * g;
    h.tls_level = p.Omega * g;
    const int c = p.tls_sites.at(0);
    int range = 0;
    for (const auto& [j, bj] : dv.betas) {
        h.onsite[j] = p.omega + c2 * bj * bj;
        h.tls_coupling[j] = c2 * bj;
        range = std::max(range, std::abs(j - c));
        for (const auto& [l, bl] : dv.betas) {
            if (l <= j) continue;
            double v = c2 * bj * bl;
            if (l - j == 1) v -= p.xi;
            put_hop(h, j, l, v);
        }
    }
    h.range = range;
    return h;
}

SingleExcitationHamiltonian build_order_n(const ModelParams& p, int n) {
    validate(p);
    if (n < 0 || n > 2) throw std::invalid_argument("order must be 0, 1 or 2");
    const Order1Coefficients oc = order1_coefficients(p);
    const int c = p.tls_sites.at(0);

    if (n == 0) {
        SingleExcitationHamiltonian h = lead_skeleton(p, "order0");
        h.onsite[c] = p.omega + (oc.w1g0 - oc.w0g);
        h.tls_level = oc.w0e - oc.w0g;
        h.tls_coupling[c] = oc.j0;
        h.range = 0;
        return h;
    }
    if (n == 1) {
        SingleExcitationHamiltonian h = lead_skeleton(p, "order1");
        h.onsite[c] = p.omega + (oc.w1g0 - oc.w0g);
        h.tls_level = oc.w0e - oc.w0g;
        h.tls_coupling[c] = oc.j0;
        h.tls_coupling[c - 1] = oc.j1;
        h.tls_coupling[c + 1] = oc.j1;
        put_hop(h, c - 1, c, -p.xi + oc.w1g1);
        put_hop(h, c, c + 1, -p.xi + oc.w1g1);
        h.range = 1;
        return h;
    }

    // order 2: Taylor truncation of the exact elements at (xi/omega)^2. The
    // xi-derivatives are taken numerically: central differences with step
    // xi/16 plus one Richardson refinement (5-point stencils).
    SingleExcitationHamiltonian h = lead_skeleton(p, "order2");
    h.range = 2;
    const int s = DressedElements::span;
    ModelParams q = p;
    auto eval = [&](double xi) {
        q.xi = xi;
        return dressed_at(q);
    };
    DressedElements f0 = eval(0.0), trunc = f0;
    if (p.xi != 0.0) {
        const double hs = p.xi / 16.0;
        DressedElements fp = eval(hs), fm = eval(-hs), fp2 = eval(2 * hs), fm2 = eval(-2 * hs);
        auto fit = [&](double vp2, double vp, double v0, double vm, double vm2) {
            double c1 = (8.0 * (vp - vm) - (vp2 - vm2)) / (12.0 * hs);
            double c2 = (-vp2 + 16.0 * vp - 30.0 * v0 + 16.0 * vm - vm2) / (12.0 * hs * hs);
            return v0 + c1 * p.xi + 0.5 * c2 * p.xi * p.xi;
        };
        for (int a = 0; a < 2 * s + 1; ++a) {
            trunc.onsite[a] = fit(fp2.onsite[a], fp.onsite[a], f0.onsite[a], fm.onsite[a],
                                  fm2.onsite[a]);
            trunc.tls_coupling[a] = fit(fp2.tls_coupling[a], fp.tls_coupling[a],
                                        f0.tls_coupling[a], fm.tls_coupling[a],
                                        fm2.tls_coupling[a]);
            for (int b = a + 1; b < 2 * s + 1; ++b)
                trunc.hop[a][b] = fit(fp2.hop[a][b], fp.hop[a][b], f0.hop[a][b], fm.hop[a][b],
                                      fm2.hop[a][b]);
        }
        trunc.tls_level =
            fit(fp2.tls_level, fp.tls_level, f0.tls_level, fm.tls_level, fm2.tls_level);
    }
    h.tls_level = trunc.tls_level;
    for (int a = -s; a <= s; ++a) {
        if (std::abs(trunc.onsite[a + s]) > kDropTol * p.omega || a == 0)
            h.onsite[c + a] = p.omega + trunc.onsite[a + s];
        if (std::abs(trunc.tls_coupling[a + s]) > kDropTol * p.omega)
            h.tls_coupling[c + a] = trunc.tls_coupling[a + s];
        for (int b = a + 1; b <= s; ++b) {
            double v = trunc.hop[a + s][b + s];
            if (b - a == 1) {
                put_hop(h, c + a, c + b, -p.xi + v);  // bare hop kept exact
            } else if (std::abs(v) > kDropTol * p.omega) {
                put_hop(h, c + a, c + b, v);
            }
        }
    }
    return h;
}

SingleExcitationHamiltonian build_rwa(const ModelParams& p) {
    validate(p);
    SingleExcitationHamiltonian h = lead_skeleton(p, "rwa");
    h.tls_level = p.Omega;
    h.tls_coupling[p.tls_sites.at(0)] = p.lambda;
    h.range = 0;
    return h;
}

StrongCouplingReduction strong_coupling_reduction(const ModelParams& p) {
    validate(p);
    StrongCouplingReduction red;
    const double r = p.lambda / p.omega;
    const double g0 = std::exp(-2.0 * r * r);
    red.effective_defect = 2.0 * p.Omega * r * r * g0;
    red.warn = r * r * g0 > 0.05;  // dressed TLS level not yet negligible
    red.h = lead_skeleton(p, "strong-coupling");
    red.h.onsite[p.tls_sites.at(0)] = p.omega + red.effective_defect;
    red.h.range = 0;
    return red;
}

std::pair<double, double> adiabatic_band_energies(const ModelParams& p,
                                                  const PolaronAmplitudes& pa,
                                                  double k) {
    validate(p);
    const DisplacementVector dv = displacement_vector(pa);
    const int c = p.tls_sites.at(0);
    double bhat = 0.0;
    for (const auto& [j, b] : dv.betas) bhat += b * std::cos(k * (j - c));
    const double split = 0.5 * p.Omega * (1.0 - bhat * bhat) * dv.gaussian_factor;
    const double ek = dispersion(p, k);
    return {ek + split, ek - split};
}

}  // namespace cra
