#include "cra/fock.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <ostream>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#ifdef CRA_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cra {

namespace {

using cplx = std::complex<double>;
const double kPi = std::acos(-1.0);
constexpr double kDropTol = 1e-14;       // relative to omega
constexpr double kUnderflow = 1e-16;     // early exit in overlap products

using Occ = std::array<int8_t, TruncatedFockSpace::max_photons>;

Occ empty_occ() {
    Occ o;
    o.fill(0);
    return o;
}

}  // namespace

uint64_t TruncatedFockSpace::encode(const Occ& occ, int n_photons, int tls, int half) {
    uint64_t key = 0;
    for (int i = 0; i < max_photons; ++i) {
        uint64_t byte = i < n_photons ? static_cast<uint64_t>(occ[i] + half) : 0xffu;
        key |= byte << (8 * i);
    }
    key |= static_cast<uint64_t>(n_photons) << 56;
    key |= static_cast<uint64_t>(tls ? 1 : 0) << 60;
    return key;
}

int TruncatedFockSpace::decode(uint64_t key, Occ& occ, int& tls, int half) {
    const int n = static_cast<int>((key >> 56) & 0xf);
    tls = static_cast<int>((key >> 60) & 0x1);
    occ = empty_occ();
    for (int i = 0; i < n; ++i)
        occ[i] = static_cast<int8_t>(static_cast<int>((key >> (8 * i)) & 0xff) - half);
    return n;
}

int TruncatedFockSpace::find(uint64_t key) const {
    auto it = index.find(key);
    return it == index.end() ? -1 : it->second;
}

TruncatedFockSpace make_fock_space(int chain_length, int total_cutoff, int per_site_cutoff,
                                   int parity) {
    if (chain_length < 1 || chain_length % 2 == 0)
        throw std::invalid_argument("chain_length must be odd and positive");
    if (total_cutoff < 0 || total_cutoff > TruncatedFockSpace::max_photons)
        throw std::invalid_argument("total_cutoff out of range");
    if (per_site_cutoff < 0) per_site_cutoff = total_cutoff;

    TruncatedFockSpace sp;
    sp.chain_length = chain_length;
    sp.per_site_cutoff = per_site_cutoff;
    sp.total_cutoff = total_cutoff;
    sp.parity = parity;
    const int half = sp.half();

    // photon positions ascending with repetition bounded by per_site_cutoff
    Occ occ = empty_occ();
    auto emit = [&](int n, int tls) {
        sp.states.push_back(TruncatedFockSpace::encode(occ, n, tls, half));
    };
    auto rec = [&](auto&& self, int depth, int first, int budget) -> void {
        for (int tls = 0; tls <= 1; ++tls) {
            if (depth + tls > total_cutoff) continue;  // flag counts as one excitation
            if (parity < 0 || (depth + tls) % 2 == parity) emit(depth, tls);
        }
        if (budget == 0) return;
        for (int j = first; j <= half; ++j) {
            int reps = 0;
            for (int i = depth - 1; i >= 0 && occ[i] == j; --i) ++reps;
            if (reps >= per_site_cutoff) continue;
            occ[depth] = static_cast<int8_t>(j);
            self(self, depth + 1, j, budget - 1);
        }
    };
    rec(rec, 0, -half, total_cutoff);

    std::sort(sp.states.begin(), sp.states.end());
    sp.index.reserve(sp.states.size() * 2);
    for (int i = 0; i < sp.dim(); ++i) sp.index.emplace(sp.states[i], i);
    return sp;
}

namespace {

struct DecodedState {
    Occ occ;
    int n;
    int tls;
};

std::vector<DecodedState> decode_all(const TruncatedFockSpace& sp) {
    std::vector<DecodedState> out(sp.dim());
    for (int i = 0; i < sp.dim(); ++i)
        out[i].n = TruncatedFockSpace::decode(sp.states[i], out[i].occ, out[i].tls, sp.half());
    return out;
}

int count_at(const DecodedState& s, int site) {
    int c = 0;
    for (int i = 0; i < s.n; ++i) c += (s.occ[i] == site);
    return c;
}

// remove one photon at `site`; positions stay sorted
Occ remove_at(const DecodedState& s, int site) {
    Occ o = empty_occ();
    int w = 0;
    bool taken = false;
    for (int i = 0; i < s.n; ++i) {
        if (!taken && s.occ[i] == site) {
            taken = true;
            continue;
        }
        o[w++] = s.occ[i];
    }
    return o;
}

Occ insert_at(const DecodedState& s, int site) {
    Occ o = empty_occ();
    int w = 0, i = 0;
    for (; i < s.n && s.occ[i] < site; ++i) o[w++] = s.occ[i];
    o[w++] = static_cast<int8_t>(site);
    for (; i < s.n; ++i) o[w++] = s.occ[i];
    return o;
}

// occupation numbers restricted to a window of sites, as a dense vector
void window_occupation(const DecodedState& s, int wlo, int whi, int8_t* out) {
    std::fill(out, out + (whi - wlo + 1), 0);
    for (int i = 0; i < s.n; ++i)
        if (s.occ[i] >= wlo && s.occ[i] <= whi) ++out[s.occ[i] - wlo];
}

struct TlsGroup {
    std::vector<int> members;
};

}  // namespace

SparseOperator build_rotated_hamiltonian(const ModelParams& p, const PolaronAmplitudes& pa,
                                         const TruncatedFockSpace& space, bool parallel) {
    validate(p);
    SparseOperator op;
    op.dim = space.dim();
    const int half = space.half();
    const double drop = kDropTol * p.omega;
    const std::vector<DecodedState> dec = decode_all(space);
    const DisplacementVector dv = displacement_vector(pa);

    // chain part: omega N on the diagonal is merged into the TLS diagonal pass
    // below; hops are emitted here (serial, it is the cheap part)
    for (int i = 0; i < space.dim(); ++i) {
        const DecodedState& s = dec[i];
        for (int a = 0; a < s.n; ++a) {
            if (a > 0 && s.occ[a] == s.occ[a - 1]) continue;  // one move per source site
            const int j = s.occ[a];
            for (int dir = -1; dir <= 1; dir += 2) {
                const int l = j + dir;
                if (l < -half || l > half) continue;
                const int nl = count_at(s, l);
                if (nl >= space.per_site_cutoff) continue;
                DecodedState t = s;
                t.occ = remove_at(s, j);
                --t.n;
                t.occ = insert_at(t, l);
                ++t.n;
                const int ti = space.find(
                    TruncatedFockSpace::encode(t.occ, t.n, t.tls, half));
                if (ti <= i) continue;  // upper triangle once
                const double v = -p.xi * std::sqrt(double(count_at(s, j)) * double(nl + 1));
                if (std::abs(v) > drop) op.entries.push_back({i, ti, v});
            }
        }
    }

    // TLS part: (Omega/2) [cosh X sigma_z + i sinh X sigma_y] in the rotated
    // frame couples states that agree outside the displacement window. Group
    // by outside-window occupation, then scan pairs inside each group.
    const int c = p.tls_sites.at(0);
    int wlo = std::max(-half, c - pa.range), whi = std::min(half, c + pa.range);
    const int wlen = whi - wlo + 1;
    const int ncut = space.per_site_cutoff;

    // per-site overlap tables <m|D(beta_j)|n>
    std::vector<Eigen::MatrixXd> tab(wlen);
    for (int w = 0; w < wlen; ++w) {
        auto it = dv.betas.find(wlo + w);
        const double beta = it == dv.betas.end() ? 0.0 : it->second;
        tab[w].resize(ncut + 1, ncut + 1);
        for (int m = 0; m <= ncut; ++m)
            for (int n = 0; n <= ncut; ++n) tab[w](m, n) = displacement_overlap(m, n, beta);
    }
    // sites outside the window but inside pa's map contribute only via their
    // diagonal overlap when occupied; with the window spanning pa.range they
    // are absent by construction

    std::unordered_map<uint64_t, TlsGroup> group_map;
    group_map.reserve(space.dim());
    std::vector<int8_t> win(space.dim() * wlen);
    for (int i = 0; i < space.dim(); ++i) {
        window_occupation(dec[i], wlo, whi, &win[size_t(i) * wlen]);
        // group key: photons outside the window, ignoring the TLS flag
        Occ outside = empty_occ();
        int n_out = 0;
        for (int a = 0; a < dec[i].n; ++a)
            if (dec[i].occ[a] < wlo || dec[i].occ[a] > whi) outside[n_out++] = dec[i].occ[a];
        group_map[TruncatedFockSpace::encode(outside, n_out, 0, half)].members.push_back(i);
    }
    std::vector<TlsGroup> groups;
    groups.reserve(group_map.size());
    for (auto& [key, g] : group_map) groups.push_back(std::move(g));
    // deterministic group order regardless of hash-map iteration
    std::sort(groups.begin(), groups.end(),
              [](const TlsGroup& a, const TlsGroup& b) { return a.members[0] < b.members[0]; });

    const double c2 = 0.5 * p.Omega;
    std::vector<std::vector<SparseOperator::Entry>> buf(groups.size());

    auto do_group = [&](size_t gi) {
        const std::vector<int>& mem = groups[gi].members;
        std::vector<SparseOperator::Entry>& out = buf[gi];
        for (size_t a = 0; a < mem.size(); ++a) {
            const int i = mem[a];
            const int8_t* wi = &win[size_t(i) * wlen];
            const int si = dec[i].tls;
            for (size_t b = a; b < mem.size(); ++b) {
                const int j = mem[b];
                const DecodedState& sj = dec[j];
                const int8_t* wj = &win[size_t(j) * wlen];
                const int dn = (dec[i].n - sj.n) & 1;
                const int ds = si ^ sj.tls;
                if (dn != ds) continue;  // cosh needs even dN, sinh odd
                // orient the product with the ground-flag state as the bra
                const int8_t *rowo = wi, *colo = wj;
                if (ds && si == 1) {
                    rowo = wj;
                    colo = wi;
                }
                double prod = 1.0;
                for (int w = 0; w < wlen; ++w) {
                    prod *= tab[w](rowo[w], colo[w]);
                    if (std::abs(prod) < kUnderflow) break;
                }
                double v = c2 * prod;
                if (!ds && si == 0) v = -v;  // sigma_z on the ground flag
                if (i == j) {
                    v += p.omega * dec[i].n;  // fold in the chain diagonal
                    out.push_back({i, j, v});
                } else if (std::abs(v) > drop) {
                    out.push_back({std::min(i, j), std::max(i, j), v});
                }
            }
        }
    };

    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long gi = 0; gi < static_cast<long long>(groups.size()); ++gi)
            do_group(static_cast<size_t>(gi));
    } else {
        for (size_t gi = 0; gi < groups.size(); ++gi) do_group(gi);
    }
    for (const auto& b : buf) op.entries.insert(op.entries.end(), b.begin(), b.end());

    // a chain hop can connect a pair the TLS block also couples: merge so
    // every (row, col) key appears once
    std::sort(op.entries.begin(), op.entries.end(),
              [](const SparseOperator::Entry& a, const SparseOperator::Entry& b) {
                  return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    size_t w = 0;
    for (size_t r = 0; r < op.entries.size(); ++r) {
        if (w > 0 && op.entries[w - 1].row == op.entries[r].row &&
            op.entries[w - 1].col == op.entries[r].col)
            op.entries[w - 1].value += op.entries[r].value;
        else
            op.entries[w++] = op.entries[r];
    }
    op.entries.resize(w);
    return op;
}

void dump_sparse(const SparseOperator& op, std::ostream& out) {
    out << "# dim " << op.dim << "\n";
    char line[80];
    for (const auto& e : op.entries) {
        std::snprintf(line, sizeof line, "%d %d %.17g\n", e.row, e.col, e.value);
        out << line;
    }
}

namespace {

Eigen::SparseMatrix<double> to_sparse(const SparseOperator& op) {
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(op.entries.size() * 2);
    for (const auto& e : op.entries) {
        tr.emplace_back(e.row, e.col, e.value);
        if (e.row != e.col) tr.emplace_back(e.col, e.row, e.value);
    }
    Eigen::SparseMatrix<double> m(op.dim, op.dim);
    m.setFromTriplets(tr.begin(), tr.end());
    return m;
}

struct RestProblem {
    TruncatedFockSpace space;
    Eigen::VectorXd phi;
    double e0 = 0.0;
    int window = 0;  // half-width of the interior window
};

// interior problem left when one dressed photon travels far away: budget
// cp - 1, even parity, confined to |j| <= window
RestProblem make_rest_problem(const ModelParams& p, const PolaronAmplitudes& pa, int window,
                              int cp) {
    RestProblem rest;
    rest.window = window;
    rest.space = make_fock_space(2 * window + 1, cp - 1, cp - 1, 0);
    SparseOperator h = build_rotated_hamiltonian(p, pa, rest.space, false);
    Eigen::MatrixXd dense = Eigen::MatrixXd(to_sparse(h));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    rest.e0 = es.eigenvalues()(0);
    rest.phi = es.eigenvectors().col(0);
    return rest;
}

}  // namespace

struct NumericScatteringSolver::Impl {
    ModelParams p;
    int cp = 0;
    TruncatedFockSpace space;
    Eigen::SparseMatrix<double> h;
    RestProblem rest;
    // states (photon at -S or +S) x (rest config in the channel space):
    // row index, sqrt(n_end) hop weight, phi component of the rest config
    struct ChannelRow {
        int row;
        double weight;
        double phi;
    };
    std::vector<ChannelRow> left, right;
    std::vector<int> end_rows;  // states with an end photon not in the channel
};

NumericScatteringSolver::NumericScatteringSolver(const ModelParams& p, int chain_length,
                                                 int cp)
    : impl_(std::make_unique<Impl>()) {
    validate(p);
    if (cp < 1 || cp > 3) throw std::invalid_argument("cp must be 1, 2 or 3");
    if (p.tls_sites != std::vector<int>{0})
        throw std::invalid_argument("numeric scattering expects the TLS at site 0");
    impl_->p = p;
    impl_->cp = cp;
    PolaronAmplitudes pa = solve_alpha_closed(p);
    const int half = (chain_length - 1) / 2;
    const int window = std::min(pa.range + 8, half - 2);
    if (window < pa.range)
        throw std::invalid_argument("chain too short for the polaron window");
    impl_->space = make_fock_space(chain_length, cp, cp, 1);
    impl_->h = to_sparse(build_rotated_hamiltonian(p, pa, impl_->space, true));
    impl_->rest = make_rest_problem(p, pa, window, cp);

    const std::vector<DecodedState> dec = decode_all(impl_->space);
    const int rhalf = impl_->rest.window;
    for (int i = 0; i < impl_->space.dim(); ++i) {
        const DecodedState& s = dec[i];
        for (int side = 0; side < 2; ++side) {
            const int end = side == 0 ? -half : half;
            const int ne = count_at(s, end);
            if (ne == 0) continue;
            // rest config after peeling one photon off the end slab
            DecodedState r;
            r.occ = remove_at(s, end);
            r.n = s.n - 1;
            r.tls = s.tls;
            bool confined = true;
            for (int a = 0; a < r.n; ++a)
                if (std::abs(static_cast<int>(r.occ[a])) > rhalf) confined = false;
            int ri = -1;
            if (confined)
                ri = impl_->rest.space.find(
                    TruncatedFockSpace::encode(r.occ, r.n, r.tls, rhalf));
            if (ri < 0 || ne > 1) {
                impl_->end_rows.push_back(i);  // closed channel: hard wall
                continue;
            }
            Impl::ChannelRow cr{i, std::sqrt(double(ne)), impl_->rest.phi(ri)};
            (side == 0 ? impl_->left : impl_->right).push_back(cr);
        }
    }
}

NumericScatteringSolver::~NumericScatteringSolver() = default;

int NumericScatteringSolver::dim() const { return impl_->space.dim(); }
double NumericScatteringSolver::rest_energy() const { return impl_->rest.e0; }

ScatteringAmplitudes NumericScatteringSolver::solve(double k, NumericDiagnostics* diag) const {
    if (k < 1e-3 || k > kPi - 1e-3)
        throw std::domain_error("k too close to the band edge");
    const Impl& im = *impl_;
    const int d = im.space.dim();
    const int ir = d, it = d + 1;
    const int half = (im.space.chain_length - 1) / 2;
    const double e = im.p.omega + im.rest.e0 - 2.0 * im.p.xi * std::cos(k);

    std::vector<Eigen::Triplet<cplx>> tr;
    tr.reserve(im.h.nonZeros() + d + 4 * (im.left.size() + im.right.size()) + 8);
    for (int col = 0; col < im.h.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator jt(im.h, col); jt; ++jt)
            tr.emplace_back(jt.row(), col, cplx(jt.value(), 0.0));
    for (int i = 0; i < d; ++i) tr.emplace_back(i, i, cplx(-e, 0.0));

    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(d + 2);
    const cplx out_phase = std::polar(1.0, k * (half + 1));
    const cplx in_phase = std::polar(1.0, -k * (half + 1));
    const cplx slab_out = std::polar(1.0, k * half);
    const cplx slab_in = std::polar(1.0, -k * half);

    // virtual hop off the left end: amplitude of (photon at -S-1) x rest is
    // (e^{-ik(S+1)} + r e^{ik(S+1)}) phi(rest)
    for (const auto& cr : im.left) {
        const cplx w = -im.p.xi * cr.weight * cr.phi;
        tr.emplace_back(cr.row, ir, w * out_phase);
        b(cr.row) -= w * in_phase;
    }
    for (const auto& cr : im.right) {
        const cplx w = -im.p.xi * cr.weight * cr.phi;
        tr.emplace_back(cr.row, it, w * out_phase);
    }
    // channel-projected consistency at the slabs: sum phi(rest) psi = wave(S)
    for (const auto& cr : im.left) tr.emplace_back(ir, cr.row, cplx(cr.phi * cr.weight, 0.0));
    tr.emplace_back(ir, ir, -slab_out);
    b(ir) = slab_in;
    for (const auto& cr : im.right) tr.emplace_back(it, cr.row, cplx(cr.phi * cr.weight, 0.0));
    tr.emplace_back(it, it, -slab_out);

    Eigen::SparseMatrix<cplx> a(d + 2, d + 2);
    a.setFromTriplets(tr.begin(), tr.end());
    a.makeCompressed();
#ifdef CRA_HAVE_UMFPACK
    Eigen::UmfPackLU<Eigen::SparseMatrix<cplx>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
#endif
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("truncated-Fock scattering system singular");
    Eigen::VectorXcd x = lu.solve(b);

    ScatteringAmplitudes amp;
    amp.k = k;
    amp.r = x(ir);
    amp.t = x(it);
    amp.method_tag = "numeric-cp" + std::to_string(im.cp);
    amp.flux_residual = std::abs(std::norm(amp.r) + std::norm(amp.t) - 1.0);
    if (diag) {
        diag->rest_energy = im.rest.e0;
        diag->dim = d;
        double worst = 0.0;
        for (int i : im.end_rows) worst = std::max(worst, std::abs(x(i)));
        diag->end_amplitude = worst;
        diag->end_warning = worst > 1e-6;
    }
    return amp;
}

ScatteringAmplitudes scattering_numeric(const ModelParams& p, double k, int chain_length,
                                        int cp, NumericDiagnostics* diag) {
    NumericScatteringSolver solver(p, chain_length, cp);
    return solver.solve(k, diag);
}

AppendixCheck appendix_c_check(const ModelParams& p, int n_sites, int max_photons) {
    validate(p);
    if (n_sites < 1 || n_sites > 3) throw std::invalid_argument("n_sites must be 1..3");
    const int ncut = max_photons + 26;  // headroom for the displaced states
    const int c0 = n_sites / 2;

    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n_sites, n_sites);
    for (int i = 0; i < n_sites; ++i) {
        chain(i, i) = p.omega;
        if (i + 1 < n_sites) chain(i, i + 1) = chain(i + 1, i) = -p.xi;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chain);
    const Eigen::VectorXd eps = es.eigenvalues();
    const Eigen::MatrixXd o = es.eigenvectors();

    // per-mode operators in the truncated Fock space
    Eigen::MatrixXd bdag = Eigen::MatrixXd::Zero(ncut, ncut);
    for (int n = 1; n < ncut; ++n) bdag(n, n - 1) = std::sqrt(double(n));
    const Eigen::MatrixXd bop = bdag.transpose();
    const Eigen::MatrixXd xop = bdag + bop;
    const Eigen::MatrixXd gen = bdag - bop;

    std::vector<Eigen::MatrixXd> dplus(n_sites), dminus(n_sites);
    Eigen::VectorXd lam(n_sites), disp(n_sites);
    for (int m = 0; m < n_sites; ++m) {
        lam(m) = p.lambda * o(c0, m);
        disp(m) = lam(m) / eps(m);
        const Eigen::MatrixXd gp = disp(m) * gen, gm = -disp(m) * gen;
        dplus[m] = gp.exp();   // D(+d_m)
        dminus[m] = gm.exp();  // D(-d_m)
    }

    // spinor state: two blocks (e, g), each a rank-n_sites tensor over modes
    const long block = static_cast<long>(std::pow(ncut, n_sites));
    auto mode_stride = [&](int m) {
        long s = 1;
        for (int i = m + 1; i < n_sites; ++i) s *= ncut;
        return s;
    };

    auto apply_mode = [&](const Eigen::MatrixXd& mat, const Eigen::VectorXd& v, int m) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
        const long stride = mode_stride(m);
        const long outer = v.size() / (stride * ncut);
        for (long a = 0; a < outer; ++a)
            for (long s = 0; s < stride; ++s) {
                const long base = a * stride * ncut + s;
                for (int i = 0; i < ncut; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < ncut; ++j)
                        acc += mat(i, j) * v(base + j * stride);
                    out(base + i * stride) = acc;
                }
            }
        return out;
    };

    auto apply_h = [&](const Eigen::VectorXd& ve, const Eigen::VectorXd& vg) {
        std::pair<Eigen::VectorXd, Eigen::VectorXd> out{
            Eigen::VectorXd::Zero(block), Eigen::VectorXd::Zero(block)};
        // oscillator energies, diagonal in mode occupations
        for (long idx = 0; idx < block; ++idx) {
            double en = 0.0;
            long rem = idx;
            for (int m = 0; m < n_sites; ++m) {
                const long stride = mode_stride(m);
                en += eps(m) * double(rem / stride);
                rem %= stride;
            }
            out.first(idx) = (en + 0.5 * p.Omega) * ve(idx);
            out.second(idx) = (en - 0.5 * p.Omega) * vg(idx);
        }
        // sigma_x coupling swaps the blocks
        for (int m = 0; m < n_sites; ++m) {
            out.first += lam(m) * apply_mode(xop, vg, m);
            out.second += lam(m) * apply_mode(xop, ve, m);
        }
        return out;
    };

    // basis occupations with sum <= max_photons
    std::vector<std::vector<int>> occs;
    std::vector<int> cur(n_sites, 0);
    auto gen_occ = [&](auto&& self, int m, int left) -> void {
        if (m == n_sites) {
            occs.push_back(cur);
            return;
        }
        for (int n = 0; n <= left; ++n) {
            cur[m] = n;
            self(self, m + 1, left - n);
        }
    };
    gen_occ(gen_occ, 0, max_photons);

    auto displaced = [&](const std::vector<int>& n, bool plus) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(block);
        long idx = 0;
        for (int m = 0; m < n_sites; ++m) idx += n[m] * mode_stride(m);
        v(idx) = 1.0;
        for (int m = 0; m < n_sites; ++m) v = apply_mode(plus ? dplus[m] : dminus[m], v, m);
        return v;
    };

    AppendixCheck chk{0.0, 0.0};
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> psi_plus, psi_minus;
    for (const auto& n : occs) {
        // |n_+> = D(-d)|n>, |n_-> = D(+d)|n>
        Eigen::VectorXd np = displaced(n, false), nm = displaced(n, true);
        psi_plus.emplace_back(0.5 * (np + nm), 0.5 * (np - nm));
        psi_minus.emplace_back(0.5 * (np - nm), 0.5 * (np + nm));
    }
    for (size_t a = 0; a < occs.size(); ++a) {
        int na = 0;
        for (int x : occs[a]) na += x;
        for (size_t b = 0; b < occs.size(); ++b) {
            int nb = 0;
            for (int x : occs[b]) nb += x;
            if (nb != na && nb != na + 1) continue;
            auto hv = apply_h(psi_plus[b].first, psi_plus[b].second);
            const double el = std::abs(psi_minus[a].first.dot(hv.first) +
                                       psi_minus[a].second.dot(hv.second));
            if (nb == na)
                chk.max_same_block = std::max(chk.max_same_block, el);
            else
                chk.max_adjacent_block = std::max(chk.max_adjacent_block, el);
        }
    }
    return chk;
}

BoundStateReport bound_state_spectrum(const ModelParams& p, int chain_length, int cp,
                                      int n_levels) {
    validate(p);
    PolaronAmplitudes pa = solve_alpha_closed(p);
    TruncatedFockSpace space = make_fock_space(chain_length, cp, cp, 1);
    Eigen::SparseMatrix<double> h = to_sparse(build_rotated_hamiltonian(p, pa, space, true));
    const int dim = space.dim();
    const int half = (chain_length - 1) / 2;
    const int window = std::min(pa.range + 8, half - 2);
    const double e_ref = make_rest_problem(p, pa, window, cp).e0;

    // Lanczos with full reorthogonalization
    const int m = std::min(dim, std::max(120, 12 * n_levels));
    Eigen::MatrixXd v(dim, m);
    Eigen::VectorXd alpha(m), beta(m);
    std::mt19937 rng(12345);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd w(dim);
    for (int i = 0; i < dim; ++i) w(i) = gauss(rng);
    w.normalize();
    v.col(0) = w;
    int steps = m;
    for (int j = 0; j < m; ++j) {
        w = h * v.col(j);
        alpha(j) = v.col(j).dot(w);
        w -= alpha(j) * v.col(j);
        if (j > 0) w -= beta(j - 1) * v.col(j - 1);
        // two passes of full reorthogonalization
        for (int pass = 0; pass < 2; ++pass)
            w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
        beta(j) = w.norm();
        if (j + 1 < m) {
            if (beta(j) < 1e-12 * p.omega) {
                steps = j + 1;
                break;
            }
            v.col(j + 1) = w / beta(j);
        }
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        t(j, j) = alpha(j);
        if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

    BoundStateReport rep;
    const int nl = std::min(n_levels, steps);
    for (int i = 0; i < nl; ++i) {
        const double theta = es.eigenvalues()(i);
        Eigen::VectorXd x = v.leftCols(steps) * es.eigenvectors().col(i);
        const double resid = (h * x - theta * x).norm();
        const double rel = theta - e_ref;
        rep.energies.push_back(rel);
        rep.in_band.push_back(std::abs(rel - p.omega) <= 2.0 * std::abs(p.xi));
        rep.residuals.push_back(resid);
        if (resid > 1e-8 * std::max(1.0, p.omega)) rep.converged = false;
    }
    return rep;
}

}  // namespace cra
