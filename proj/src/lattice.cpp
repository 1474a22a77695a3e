#include "wiresim/lattice.hpp"

#include <random>

namespace wiresim {

namespace {

void check_site(int s, int n, const char* who) {
    if (s < 0 || s >= n) throw std::invalid_argument(std::string(who) + ": site out of range");
}

}  // namespace

void QuadraticHamiltonian::add_hopping(int a, int b, double amp) {
    check_site(a, n_sites, "add_hopping");
    check_site(b, n_sites, "add_hopping");
    if (a == b) throw std::invalid_argument("add_hopping: a == b");
    terms.push_back({TermKind::Hopping, a, b, amp});
}

void QuadraticHamiltonian::add_pairing(int a, int b, double amp) {
    check_site(a, n_sites, "add_pairing");
    check_site(b, n_sites, "add_pairing");
    if (a == b) throw std::invalid_argument("add_pairing: a == b");
    terms.push_back({TermKind::Pairing, a, b, amp});
}

void QuadraticHamiltonian::add_potential(int a, double amp) {
    check_site(a, n_sites, "add_potential");
    terms.push_back({TermKind::Potential, a, a, amp});
}

void QuadraticHamiltonian::add_kitaev_link(int a, int b, double J, double Delta) {
    add_hopping(a, b, -J);
    add_pairing(a, b, Delta);
}

// Expansion of each term over Majorana bilinears, with x the coefficient of
// (i/2) c_p c_q (A_pq = x, A_qp = -x):
//   amp * a_j† a_j            -> x(x_j, y_j) = -amp, scalar amp/2
//   amp * (a_j† a_k + h.c.)   -> x(x_j, y_k) = -amp, x(y_j, x_k) = +amp
//   amp * (a_j a_k + h.c.)    -> x(x_j, y_k) = -amp, x(y_j, x_k) = -amp
// Hand-derived; cross-validated term by term against the Fock oracle.
MajoranaForm QuadraticHamiltonian::to_majorana() const {
    MajoranaForm f;
    const int m = 2 * n_sites;
    f.A = Eigen::MatrixXd::Zero(m, m);
    auto add = [&](int p, int q, double x) {
        f.A(p, q) += x;
        f.A(q, p) -= x;
    };
    for (const QuadraticTerm& t : terms) {
        const int xa = majorana_x(t.a), ya = majorana_y(t.a);
        const int xb = majorana_x(t.b), yb = majorana_y(t.b);
        switch (t.kind) {
            case TermKind::Potential:
                add(xa, ya, -t.amp);
                f.offset += 0.5 * t.amp;
                break;
            case TermKind::Hopping:
                add(xa, yb, -t.amp);
                add(ya, xb, +t.amp);
                break;
            case TermKind::Pairing:
                add(xa, yb, -t.amp);
                add(ya, xb, -t.amp);
                break;
        }
    }
    return f;
}

QuadraticHamiltonian kitaev_chain(int n, double J, double Delta, double mu, bool closed) {
    if (n < 1) throw std::invalid_argument("kitaev_chain: need at least one site");
    QuadraticHamiltonian h(n);
    for (int j = 0; j + 1 < n; ++j) h.add_kitaev_link(j, j + 1, J, Delta);
    if (closed) {
        if (n < 3) throw std::invalid_argument("kitaev_chain: closed chain needs n >= 3");
        h.add_kitaev_link(n - 1, 0, J, Delta);
    }
    if (mu != 0.0)
        for (int j = 0; j < n; ++j) h.add_potential(j, -mu);
    return h;
}

void add_trap(QuadraticHamiltonian& h, const WireNetwork& net, TrapPotential trap) {
    if (h.n_sites != net.size())
        throw std::invalid_argument("add_trap: hamiltonian/network size mismatch");
    for (int w = 0; w < net.wires; ++w)
        for (int j = 1; j <= net.length; ++j)
            h.add_potential(net.flatten({w, j}), trap.value(net.length, j));
}

std::vector<double> disorder_draws(int n, double range, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (double& v : out) {
        // top 53 bits -> [0,1); affine map to [-range, range]
        double u = double(rng() >> 11) * 0x1p-53;
        v = range * (2.0 * u - 1.0);
    }
    return out;
}

}  // namespace wiresim
