#include "cra/rabi.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>

#include "cra/polaron.hpp"

namespace cra {

namespace {

void check(const RabiParams& p) {
    if (!(p.omega > 0.0)) throw std::invalid_argument("omega must be positive");
    if (p.Omega < 0.0) throw std::invalid_argument("Omega must be non-negative");
}

// parity sector of the Rabi model as a tridiagonal chain in n; sector +1
// holds |e,even n> and |g,odd n>, sector -1 the complement
std::vector<double> parity_block_levels(const RabiParams& p, int cutoff, int sector) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
    for (int n = 0; n <= cutoff; ++n) {
        const double spin = (n % 2 == 0) ? sector : -sector;
        h(n, n) = p.omega * n + 0.5 * p.Omega * spin;
        if (n + 1 <= cutoff) h(n, n + 1) = h(n + 1, n) = p.lambda * std::sqrt(n + 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return {es.eigenvalues().data(), es.eigenvalues().data() + cutoff + 1};
}

std::vector<double> exact_levels(const RabiParams& p, int cutoff, int n_levels) {
    std::vector<double> a = parity_block_levels(p, cutoff, +1);
    std::vector<double> b = parity_block_levels(p, cutoff, -1);
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.resize(std::min<size_t>(a.size(), n_levels));
    return a;
}

}  // namespace

int minimum_cutoff(const RabiParams& p) {
    const double r = p.lambda / p.omega;
    return 20 + static_cast<int>(std::ceil(10.0 * r * r));
}

SpectrumResult rabi_exact(const RabiParams& p, int n_levels) {
    check(p);
    SpectrumResult res;
    res.method_tag = "exact";
    int cutoff = std::max(p.cutoff, minimum_cutoff(p));
    std::vector<double> cur = exact_levels(p, cutoff, n_levels);
    double shift = 1.0;
    for (int pass = 0; pass < 6; ++pass) {
        cutoff *= 2;
        std::vector<double> next = exact_levels(p, cutoff, n_levels);
        shift = 0.0;
        for (size_t i = 0; i < cur.size(); ++i)
            shift = std::max(shift, std::abs(next[i] - cur[i]));
        cur = std::move(next);
        if (shift < 1e-10) break;
    }
    res.levels = std::move(cur);
    res.convergence = shift;
    return res;
}

SpectrumResult rabi_jc(const RabiParams& p, int n_levels) {
    check(p);
    SpectrumResult res;
    res.method_tag = "jc";
    std::vector<double> lv = {-0.5 * p.Omega};  // |g,0> singlet
    for (int n = 1; n <= n_levels + 1; ++n) {
        const double mean = p.omega * (n - 0.5);
        const double det = 0.5 * (p.omega - p.Omega);
        const double rabi = std::sqrt(det * det + n * p.lambda * p.lambda);
        lv.push_back(mean - rabi);
        lv.push_back(mean + rabi);
    }
    std::sort(lv.begin(), lv.end());
    lv.resize(std::min<size_t>(lv.size(), n_levels));
    res.levels = std::move(lv);
    return res;
}

SpectrumResult rabi_adiabatic(const RabiParams& p, int n_levels) {
    check(p);
    SpectrumResult res;
    res.method_tag = "adiabatic";
    const double r = p.lambda / p.omega;
    std::vector<double> lv;
    for (int n = 0; n <= n_levels + 2; ++n) {
        const double base = p.omega * (n - r * r);
        const double split = 0.5 * p.Omega * displacement_overlap(n, n, -2.0 * r);
        lv.push_back(base - split);
        lv.push_back(base + split);
    }
    std::sort(lv.begin(), lv.end());
    lv.resize(std::min<size_t>(lv.size(), n_levels));
    res.levels = std::move(lv);
    return res;
}

SpectrumResult rabi_grwa(const RabiParams& p, int n_levels) {
    check(p);
    SpectrumResult res;
    res.method_tag = "grwa";
    const double r = p.lambda / p.omega;
    auto adiab = [&](int n, int sign) {
        return p.omega * (n - r * r) +
               0.5 * sign * p.Omega * displacement_overlap(n, n, 2.0 * r);
    };
    std::vector<double> lv = {adiab(0, -1)};  // uncoupled lowest doublet member
    for (int n = 1; n <= n_levels + 2; ++n) {
        const double e1 = adiab(n, -1), e2 = adiab(n - 1, +1);
        const double c = 0.5 * p.Omega * displacement_overlap(n, n - 1, 2.0 * r);
        const double mean = 0.5 * (e1 + e2), d = 0.5 * (e1 - e2);
        const double rt = std::sqrt(d * d + c * c);
        lv.push_back(mean - rt);
        lv.push_back(mean + rt);
    }
    std::sort(lv.begin(), lv.end());
    lv.resize(std::min<size_t>(lv.size(), n_levels));
    res.levels = std::move(lv);
    return res;
}

}  // namespace cra
