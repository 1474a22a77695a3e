#pragma once

#include "wiresim/lattice.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

// Exact many-body reference implementation on the full 2^n Fock space.
// Intentionally brute force: it is the oracle the Gaussian fast path is
// validated against, so it shares nothing with that code except the term
// list and the Majorana convention.
namespace wiresim::fock {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline int dim(int n_sites) {
    if (n_sites < 1 || n_sites > 12)
        throw std::invalid_argument("fock: supported for 1..12 sites");
    return 1 << n_sites;
}

// Basis ordering: site 0 is the leftmost tensor factor, so basis index
// b = sum_j n_j 2^(n-1-j). |0> = (1,0) per site.
MatrixXcd annihilator(int n_sites, int site);

// Jordan-Wigner Majoranas in the library convention:
//   gamma[2j]   = c_{2j-1} = a_j† + a_j
//   gamma[2j+1] = c_{2j}   = -i(a_j† - a_j)
std::vector<MatrixXcd> jw_majoranas(int n_sites);

// Dense Hamiltonian assembled term by term from fermion operators.
MatrixXcd hamiltonian(const QuadraticHamiltonian& h);

// Diagonal of (-1)^N over the basis.
VectorXd parity_diagonal(int n_sites);

struct SectorGround {
    double energy = 0.0;
    VectorXcd state;
};

// Lowest eigenstate within each fermion-parity sector.
struct ParityGrounds {
    SectorGround even;
    SectorGround odd;
};
ParityGrounds sector_grounds(const QuadraticHamiltonian& h);

// Full spectrum with parity labels, ascending.
struct Level {
    double energy;
    int parity;  // +1 even, -1 odd
};
std::vector<Level> spectrum(const QuadraticHamiltonian& h);

// Covariance matrix Gamma_kl = (i/2) <[c_k, c_l]> of an arbitrary pure state.
// Throws if the result has a non-negligible imaginary part (non-physical input).
MatrixXd covariance(const VectorXcd& psi, int n_sites);

double occupation(const VectorXcd& psi, int n_sites, int site);

// Midpoint-exponential Schrödinger integrator for a time-dependent
// Hamiltonian H(t); exactly unitary per step, second-order accurate.
VectorXcd evolve(const std::function<MatrixXcd(double)>& H_of_t, VectorXcd psi,
                 double t_begin, double t_end, double dt);

}  // namespace wiresim::fock
