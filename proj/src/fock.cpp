#include "wiresim/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>

namespace wiresim::fock {

using namespace std::complex_literals;

namespace {

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

MatrixXcd annihilator(int n_sites, int site) {
    if (site < 0 || site >= n_sites) throw std::invalid_argument("fock::annihilator: bad site");
    const MatrixXcd z = (MatrixXcd(2, 2) << 1, 0, 0, -1).finished();
    const MatrixXcd id = MatrixXcd::Identity(2, 2);
    const MatrixXcd a = (MatrixXcd(2, 2) << 0, 1, 0, 0).finished();
    MatrixXcd op = MatrixXcd::Identity(1, 1);
    for (int j = 0; j < n_sites; ++j)
        op = kron(op, j < site ? z : (j == site ? a : id));
    return op;
}

std::vector<MatrixXcd> jw_majoranas(int n_sites) {
    std::vector<MatrixXcd> gamma;
    gamma.reserve(2 * n_sites);
    for (int j = 0; j < n_sites; ++j) {
        MatrixXcd a = annihilator(n_sites, j);
        MatrixXcd ad = a.adjoint();
        gamma.push_back(ad + a);
        gamma.push_back(-1i * (ad - a));
    }
    return gamma;
}

MatrixXcd hamiltonian(const QuadraticHamiltonian& h) {
    const int d = dim(h.n_sites);
    std::vector<MatrixXcd> a(h.n_sites);
    for (int j = 0; j < h.n_sites; ++j) a[j] = annihilator(h.n_sites, j);
    MatrixXcd H = MatrixXcd::Zero(d, d);
    for (const QuadraticTerm& t : h.terms) {
        switch (t.kind) {
            case TermKind::Potential:
                H += t.amp * (a[t.a].adjoint() * a[t.a]);
                break;
            case TermKind::Hopping: {
                MatrixXcd x = a[t.a].adjoint() * a[t.b];
                H += t.amp * (x + x.adjoint());
                break;
            }
            case TermKind::Pairing: {
                MatrixXcd x = a[t.a] * a[t.b];
                H += t.amp * (x + x.adjoint());
                break;
            }
        }
    }
    return H;
}

VectorXd parity_diagonal(int n_sites) {
    const int d = dim(n_sites);
    VectorXd p(d);
    for (int b = 0; b < d; ++b)
        p(b) = (std::popcount(unsigned(b)) % 2 == 0) ? 1.0 : -1.0;
    return p;
}

ParityGrounds sector_grounds(const QuadraticHamiltonian& h) {
    MatrixXcd H = hamiltonian(h);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
    const VectorXd par = parity_diagonal(h.n_sites);
    ParityGrounds out;
    bool got_even = false, got_odd = false;
    for (int k = 0; k < H.rows() && !(got_even && got_odd); ++k) {
        VectorXcd v = es.eigenvectors().col(k);
        double p = 0.0;
        for (int b = 0; b < v.size(); ++b) p += par(b) * std::norm(v(b));
        // Eigenstates of a parity-conserving H have definite parity.
        if (std::abs(std::abs(p) - 1.0) > 1e-9)
            throw std::runtime_error("fock::sector_grounds: state without definite parity");
        if (p > 0 && !got_even) {
            out.even = {es.eigenvalues()(k), v};
            got_even = true;
        } else if (p < 0 && !got_odd) {
            out.odd = {es.eigenvalues()(k), v};
            got_odd = true;
        }
    }
    if (!(got_even && got_odd)) throw std::runtime_error("fock::sector_grounds: sector missing");
    return out;
}

std::vector<Level> spectrum(const QuadraticHamiltonian& h) {
    MatrixXcd H = hamiltonian(h);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
    const VectorXd par = parity_diagonal(h.n_sites);
    std::vector<Level> out;
    out.reserve(H.rows());
    for (int k = 0; k < H.rows(); ++k) {
        VectorXcd v = es.eigenvectors().col(k);
        double p = 0.0;
        for (int b = 0; b < v.size(); ++b) p += par(b) * std::norm(v(b));
        out.push_back({es.eigenvalues()(k), p >= 0 ? +1 : -1});
    }
    return out;
}

MatrixXd covariance(const VectorXcd& psi, int n_sites) {
    auto gamma = jw_majoranas(n_sites);
    const int m = 2 * n_sites;
    MatrixXd G = MatrixXd::Zero(m, m);
    std::vector<VectorXcd> gpsi(m);
    for (int k = 0; k < m; ++k) gpsi[k] = gamma[k] * psi;
    for (int k = 0; k < m; ++k) {
        for (int l = k + 1; l < m; ++l) {
            // (i/2)<[c_k,c_l]> = i<c_k c_l> for k != l
            std::complex<double> v = 1i * gpsi[k].dot(gpsi[l]);  // <psi|c_k c_l|psi>
            if (std::abs(v.imag()) > 1e-9)
                throw std::runtime_error("fock::covariance: non-real entry");
            G(k, l) = v.real();
            G(l, k) = -v.real();
        }
    }
    return G;
}

double occupation(const VectorXcd& psi, int n_sites, int site) {
    VectorXcd ap = annihilator(n_sites, site) * psi;
    return ap.squaredNorm();
}

VectorXcd evolve(const std::function<MatrixXcd(double)>& H_of_t, VectorXcd psi,
                 double t_begin, double t_end, double dt) {
    if (dt <= 0) throw std::invalid_argument("fock::evolve: dt must be positive");
    const double span = t_end - t_begin;
    const int steps = std::max(1, int(std::ceil(span / dt - 1e-12)));
    const double h = span / steps;
    for (int s = 0; s < steps; ++s) {
        const double tm = t_begin + (s + 0.5) * h;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H_of_t(tm));
        VectorXcd phases =
            ((-1i * h) * es.eigenvalues().cast<std::complex<double>>().array()).exp().matrix();
        psi = es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi));
    }
    return psi;
}

}  // namespace wiresim::fock
