#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <unordered_map>
#include <vector>

#include "cra/polaron.hpp"
#include "cra/scattering.hpp"

namespace cra {

// Basis states of the rotated-frame truncated Fock space: photon occupations
// on an odd-length chain plus the TLS flag, total excitation
// sum_j n_j + s <= total_cutoff. States are packed into a uint64 key: the
// sorted photon positions (as offsets 0..L-1, one byte each, at most four
// photons), the photon count and the TLS flag.
struct TruncatedFockSpace {
    int chain_length = 0;     // L, odd; sites -(L-1)/2 .. (L-1)/2
    int per_site_cutoff = 0;  // max photons on one site
    int total_cutoff = 0;     // cp
    int parity = -1;          // -1: full space, else keep (N + s) % 2 == parity
    std::vector<uint64_t> states;
    std::unordered_map<uint64_t, int32_t> index;

    int half() const { return (chain_length - 1) / 2; }
    int dim() const { return static_cast<int>(states.size()); }

    static constexpr int max_photons = 4;

    // occ: photon site indices (chain coordinates), ascending; repeats allowed.
    static uint64_t encode(const std::array<int8_t, max_photons>& occ, int n_photons,
                           int tls, int half);
    // Returns photon count; fills occ (chain coordinates) and tls.
    static int decode(uint64_t key, std::array<int8_t, max_photons>& occ, int& tls,
                      int half);

    int find(uint64_t key) const;  // -1 when absent
};

TruncatedFockSpace make_fock_space(int chain_length, int total_cutoff,
                                   int per_site_cutoff = -1, int parity = -1);

// Real symmetric sparse matrix, upper triangle stored once (row <= col).
struct SparseOperator {
    struct Entry {
        int32_t row, col;
        double value;
    };
    int dim = 0;
    std::vector<Entry> entries;
};

// H in the rotated frame on the truncated space: exact chain hops and
// occupation energies, TLS term (Omega/2)[cosh X sigma_z + i sigma_y sinh X]
// through products of single-mode displacement overlaps. Elements below
// 1e-14 * omega are dropped. parallel = false runs the serial reference.
SparseOperator build_rotated_hamiltonian(const ModelParams& p, const PolaronAmplitudes& pa,
                                         const TruncatedFockSpace& space,
                                         bool parallel = true);

void dump_sparse(const SparseOperator& op, std::ostream& out);

struct NumericDiagnostics {
    double rest_energy = 0.0;     // interior ground energy of the spectator cloud
    double end_amplitude = 0.0;   // worst non-channel amplitude at the chain ends
    int dim = 0;
    bool end_warning = false;     // end_amplitude > 1e-6
};

// Single-photon scattering from the truncated-Fock Hamiltonian, cp in {1,2,3}.
// The propagating channel is the dressed photon: far from the TLS the state is
// (photon at j) x (interior ground state of the remaining budget), and the
// plane-wave ansatz is matched in that channel at the chain ends.
ScatteringAmplitudes scattering_numeric(const ModelParams& p, double k, int chain_length,
                                        int cp, NumericDiagnostics* diag = nullptr);

// Same computation with the k-independent setup (space, Hamiltonian, interior
// channel state) done once; solve(k) factorizes the bordered system per k and
// is safe to call from several threads at once.
class NumericScatteringSolver {
  public:
    NumericScatteringSolver(const ModelParams& p, int chain_length, int cp);
    ~NumericScatteringSolver();
    NumericScatteringSolver(const NumericScatteringSolver&) = delete;
    NumericScatteringSolver& operator=(const NumericScatteringSolver&) = delete;

    ScatteringAmplitudes solve(double k, NumericDiagnostics* diag = nullptr) const;
    int dim() const;
    double rest_energy() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct AppendixCheck {
    double max_same_block;      // |<Psi_-,n|H|Psi_+,n'>| over N(n) == N(n')
    double max_adjacent_block;  // same over N(n') == N(n) + 1
};

// Brute-force check that adiabatic polaron doublets of equal total occupation
// are not mixed by the full Hamiltonian. Small chain, per-mode matrix
// exponentials for the displacements (independent of displacement_overlap).
AppendixCheck appendix_c_check(const ModelParams& p, int n_sites, int max_photons);

struct BoundStateReport {
    std::vector<double> energies;    // ascending, relative to the dressed ground level
    std::vector<bool> in_band;       // within [omega - 2|xi|, omega + 2|xi|]
    std::vector<double> residuals;   // ||H v - E v|| per level
    bool converged = true;
};

// Lowest levels of the odd-parity rotated Hamiltonian via Lanczos with full
// reorthogonalization; flags levels inside the one-photon band.
BoundStateReport bound_state_spectrum(const ModelParams& p, int chain_length, int cp,
                                      int n_levels);

}  // namespace cra
