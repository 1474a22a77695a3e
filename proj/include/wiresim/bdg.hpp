#pragma once

#include "wiresim/lattice.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

// Quadratic-Hamiltonian (BdG) analysis in the Majorana picture.
// Everything here works on H = (i/4) c^T A c + offset with A real
// antisymmetric, and on covariance matrices
//   Gamma_kl = (i/2) <[c_k, c_l]>,  Gamma^T = -Gamma,  pure <=> Gamma^2 = -1.
namespace wiresim {

// A = O D O^T with O orthogonal and D block diagonal in 2x2 blocks
// [[0, -e_nu],[e_nu, 0]], e_nu >= 0 ascending. Mode nu occupies columns
// (2nu, 2nu+1) of O; its quasiparticle excitation energy is e_nu.
// The quasiparticle vacuum (all modes empty) has covariance
//   Gamma = O blkdiag([[0,1],[-1,0]]) O^T and energy offset - sum(e)/2.
struct CanonicalModes {
    Eigen::VectorXd energies;  // size n_modes, ascending, nonnegative
    Eigen::MatrixXd modes;     // 2n x 2n orthogonal
    double offset = 0.0;
};

CanonicalModes canonical_modes(const MajoranaForm& f);

// Quasiparticle energies only (ascending); cheaper than canonical_modes.
Eigen::VectorXd quasiparticle_energies(const Eigen::MatrixXd& A);

// Pfaffian of a real antisymmetric matrix (Parlett-Reid with pivoting).
// Odd dimension or asymmetry beyond tol is an error.
double pfaffian(Eigen::MatrixXd A);

struct GaussianState {
    Eigen::MatrixXd gamma;
    double energy = 0.0;
};

// Lowest Gaussian eigenstate, optionally restricted to a fermion-parity
// sector (+1 even / -1 odd); the opposite sector occupies the lowest mode.
GaussianState ground_state(const CanonicalModes& cm, std::optional<int> parity_sector = {});

// Covariance of the Gaussian eigenstate with the given per-mode occupation
// signs (+1 empty, -1 occupied), expressed in the site Majorana basis.
Eigen::MatrixXd mode_covariance(const CanonicalModes& cm, const Eigen::VectorXd& block_sign);

// Parity of a pure Gaussian state: sign of Pf(Gamma). Throws if |Pf| is not
// close to 1 (impure or invalid covariance).
int parity(const Eigen::MatrixXd& gamma, double tol = 1e-6);

// <P restricted to `sites`> for any (possibly reduced) Gaussian state.
double parity_expectation(const Eigen::MatrixXd& gamma, const std::vector<int>& sites);

// Rows/cols of both Majoranas of each listed site, in list order.
Eigen::MatrixXd restrict_sites(const Eigen::MatrixXd& m, const std::vector<int>& sites);

// |<psi_a|psi_b>|^2 = 2^-n |Pf(Ga + Gb)| for pure Gaussian states.
// Validated against the Fock oracle (see tests) before first use.
double overlap_sq(const Eigen::MatrixXd& ga, const Eigen::MatrixXd& gb, double purity_tol = 1e-6);

// <H> in a Gaussian state: offset - tr(A Gamma)/4.
double energy_expectation(const MajoranaForm& f, const Eigen::MatrixXd& gamma);

// <a_s† a_s> = (1 - Gamma(x_s, y_s)) / 2.
double occupation(const Eigen::MatrixXd& gamma, int site);

// Majorana end modes of a single wire. `left`/`right` are unit vectors in
// the 2L-dimensional Majorana space; energy is the residual splitting of the
// lowest mode pair. xi is the decay length (sites) of an exponential fit to
// the per-site envelope, r2 its coefficient of determination.
struct ZeroModeProfile {
    Eigen::VectorXd left;
    Eigen::VectorXd right;
    double energy = 0.0;
    double xi_left = 0.0, r2_left = 1.0;
    double xi_right = 0.0, r2_right = 1.0;
};

// Requires the lowest mode pair to sit below `tol`; throws otherwise.
// The degenerate pair is rotated to maximize left/right spatial separation.
ZeroModeProfile majorana_zero_modes(const MajoranaForm& wire, int length, double tol = 1e-3);

struct Level {
    double energy;
    int parity;
};

// k lowest many-body levels assembled from quasiparticle occupations
// (best-first subset-sum search), with parity labels relative to the
// quasiparticle vacuum parity.
std::vector<Level> many_body_spectrum(const CanonicalModes& cm, int k);

}  // namespace wiresim
