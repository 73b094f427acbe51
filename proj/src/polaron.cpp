#include "cra/polaron.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <Eigen/Dense>

namespace cra {

namespace {

// A = lambda omega1 / (2 xi^2 - omega omega1): the on-site amplitude of the
// geometric profile alpha_j = A q^{|j-c|}. Reduces to -lambda/omega at xi = 0.
double profile_prefactor(const ModelParams& p, double omega1) {
    return p.lambda * omega1 / (2.0 * p.xi * p.xi - p.omega * omega1);
}

int window_half_width(double q, double trunc_tol) {
    double aq = std::abs(q);
    if (aq == 0.0) return 0;
    // keep |q|^R >= trunc_tol
    int r = static_cast<int>(std::floor(std::log(trunc_tol) / std::log(aq)));
    return std::max(r, 0);
}

}  // namespace

PolaronAmplitudes solve_alpha_closed(const ModelParams& p, double trunc_tol) {
    validate(p);
    PolaronAmplitudes pa;
    pa.trunc_tol = trunc_tol;
    pa.omega1 = 0.5 * (p.omega + std::sqrt(p.omega * p.omega - 4.0 * p.xi * p.xi));
    pa.decay_ratio = p.xi / pa.omega1;
    const int c = p.tls_sites.at(0);
    const double a0 = profile_prefactor(p, pa.omega1);
    if (p.lambda == 0.0) {
        pa.alphas[c] = 0.0;
        pa.range = 0;
        return pa;
    }
    pa.range = window_half_width(pa.decay_ratio, trunc_tol);
    for (int d = -pa.range; d <= pa.range; ++d)
        pa.alphas[c + d] = a0 * std::pow(pa.decay_ratio, std::abs(d));
    return pa;
}

PolaronAmplitudes solve_alpha_recursion(const ModelParams& p, int n_sites) {
    validate(p);
    if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
    const int c = p.tls_sites.at(0);
    const int dim = 2 * n_sites + 1;
    // omega alpha_j - xi (alpha_{j+1} + alpha_{j-1}) = -lambda delta_{j,c},
    // hard wall beyond +-n_sites around the TLS site.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) {
        m(i, i) = p.omega;
        if (i + 1 < dim) {
            m(i, i + 1) = -p.xi;
            m(i + 1, i) = -p.xi;
        }
    }
    b(n_sites) = -p.lambda;
    Eigen::VectorXd a = m.partialPivLu().solve(b);
    PolaronAmplitudes pa;
    pa.omega1 = 0.5 * (p.omega + std::sqrt(p.omega * p.omega - 4.0 * p.xi * p.xi));
    pa.decay_ratio = p.xi / pa.omega1;
    pa.range = n_sites;
    pa.trunc_tol = 0.0;
    for (int i = 0; i < dim; ++i) pa.alphas[c + i - n_sites] = a(i);
    return pa;
}

PolaronAmplitudes solve_alpha_multi(const ModelParams& p, double trunc_tol) {
    validate(p);
    ModelParams single = p;
    PolaronAmplitudes pa;
    pa.trunc_tol = trunc_tol;
    pa.omega1 = 0.5 * (p.omega + std::sqrt(p.omega * p.omega - 4.0 * p.xi * p.xi));
    pa.decay_ratio = p.xi / pa.omega1;
    for (int c : p.tls_sites) {
        single.tls_sites = {c};
        PolaronAmplitudes one = solve_alpha_closed(single, trunc_tol);
        for (const auto& [j, a] : one.alphas) pa.alphas[j] += a;
        pa.range = std::max(pa.range, one.range);
    }
    return pa;
}

IntegralCheck integral_identity_check(const ModelParams& p, int j) {
    validate(p);
    const double omega1 = 0.5 * (p.omega + std::sqrt(p.omega * p.omega - 4.0 * p.xi * p.xi));
    const double q = p.xi / omega1;
    const double rhs =
        p.lambda * omega1 / (p.omega * omega1 - 2.0 * p.xi * p.xi) * std::pow(q, std::abs(j));
    auto f = [&](double k) { return std::cos(k * j) / (p.omega - 2.0 * p.xi * std::cos(k)); };
    const double pi = std::acos(-1.0);
    double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, pi, 15, 1e-14);
    const double lhs = p.lambda / pi * integral;
    return {lhs, rhs, std::abs(lhs - rhs)};
}

double displacement_overlap(int m, int n, double beta) {
    if (m < 0 || n < 0) throw std::invalid_argument("negative Fock index");
    if (beta == 0.0) return m == n ? 1.0 : 0.0;
    const int lo = std::min(m, n), hi = std::max(m, n), d = hi - lo;
    const double x = beta * beta;
    // sign convention: <m|D|n> picks up (-1)^{n-m} relative to the m>n case
    double sgn = 1.0;
    if (n > m && (d % 2)) sgn = -1.0;
    if (beta < 0.0 && (d % 2)) sgn = -sgn;

    if (lo <= 30 && x <= 9.0) {
        // direct finite sum, compensated; exact for these sizes
        long double sum = 0.0L, comp = 0.0L;
        const long double lab = std::log(std::abs((long double)beta));
        const long double lg_mn =
            0.5L * (std::lgamma((long double)m + 1) + std::lgamma((long double)n + 1));
        for (int i = 0; i <= lo; ++i) {
            long double lt = (long double)(m + n - 2 * i) * lab + lg_mn -
                             std::lgamma((long double)i + 1) -
                             std::lgamma((long double)(m - i) + 1) -
                             std::lgamma((long double)(n - i) + 1);
            long double term = std::exp(lt);
            if ((n - i) % 2) term = -term;
            if (beta < 0.0 && (m + n) % 2) term = -term;
            long double y = term - comp;
            long double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        return static_cast<double>(sum * std::exp(-0.5L * (long double)x));
    }

    // large indices: associated Laguerre by upward recurrence (still an exact
    // finite evaluation, but free of the alternating-sum cancellation)
    long double lprev = 1.0L;                      // L_0^{(d)}
    long double lcur = 1.0L + d - (long double)x;  // L_1^{(d)}
    if (lo == 0) lcur = lprev;
    for (int i = 1; i < lo; ++i)
        std::tie(lprev, lcur) = std::make_pair(
            lcur, ((2.0L * i + 1 + d - x) * lcur - (i + d) * lprev) / (long double)(i + 1));
    const long double lag = (lo == 0) ? lprev : lcur;
    long double lpre = 0.5L * (std::lgamma((long double)lo + 1) - std::lgamma((long double)hi + 1)) +
                       d * std::log(std::abs((long double)beta)) - 0.5L * x;
    return static_cast<double>(sgn * std::copysign(1.0L, lag) *
                               std::exp(lpre + std::log(std::abs(lag))));
}

DisplacementVector displacement_vector(const PolaronAmplitudes& pa) {
    DisplacementVector dv;
    double s2 = 0.0;
    for (const auto& [j, a] : pa.alphas) {
        dv.betas[j] = -2.0 * a;
        s2 += 4.0 * a * a;
    }
    dv.gaussian_factor = std::exp(-0.5 * s2);
    return dv;
}

double gaussian_factor(const PolaronAmplitudes& pa) {
    double s = 0.0;
    for (const auto& [j, a] : pa.alphas) s += a * a;
    return std::exp(-2.0 * s);
}

}  // namespace cra
