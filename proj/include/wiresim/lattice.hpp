#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace wiresim {

// Site addressing: wires are 0-based, sites within a wire are 1-based, so
// formulas like "site (u,1)" read the same in code and on paper.
struct SiteId {
    int wire = 0;
    int site = 1;
};

// Rectangular arrangement of `wires` parallel chains of equal `length`.
// `rungs` lists the columns where vertically adjacent sites are considered
// geometric neighbors (used by addressing-leak error rules).
struct WireNetwork {
    int wires = 1;
    int length = 0;
    std::vector<int> rungs;

    int size() const { return wires * length; }

    int flatten(SiteId s) const {
        if (s.wire < 0 || s.wire >= wires || s.site < 1 || s.site > length)
            throw std::invalid_argument("WireNetwork::flatten: site out of range");
        return s.wire * length + (s.site - 1);
    }
};

// Majorana index convention, fixed once for the whole library:
//   c_{2j-1} = a_j† + a_j   -> row/col  2*j   (0-based, j 0-based site)
//   c_{2j}   = -i(a_j† - a_j) -> row/col 2*j+1
// so a_j = (c_{2j-1} - i c_{2j})/2 and n_j = (1 - i c_{2j-1} c_{2j} ... ) / 2.
inline int majorana_x(int site) { return 2 * site; }
inline int majorana_y(int site) { return 2 * site + 1; }

enum class TermKind { Hopping, Pairing, Potential };

// One quadratic term, amplitude stored literally (no implicit signs):
//   Hopping:   amp * (a_a† a_b + h.c.)
//   Pairing:   amp * (a_a a_b + h.c.)      (antisymmetric under a<->b)
//   Potential: amp * a_a† a_a
struct QuadraticTerm {
    TermKind kind = TermKind::Potential;
    int a = 0;
    int b = 0;
    double amp = 0.0;
};

// H = (i/4) c^T A c + offset, A real antisymmetric.
struct MajoranaForm {
    Eigen::MatrixXd A;
    double offset = 0.0;
};

struct QuadraticHamiltonian {
    int n_sites = 0;
    std::vector<QuadraticTerm> terms;

    explicit QuadraticHamiltonian(int n = 0) : n_sites(n) {
        if (n < 0) throw std::invalid_argument("QuadraticHamiltonian: negative size");
    }

    void add_hopping(int a, int b, double amp);
    void add_pairing(int a, int b, double amp);
    void add_potential(int a, double amp);
    // Kitaev link: -J(a_a† a_b + h.c.) + Delta(a_a a_b + h.c.), ordered (a,b).
    void add_kitaev_link(int a, int b, double J, double Delta);

    MajoranaForm to_majorana() const;
};

// Open (or closed) chain, sites 0..n-1:
//   sum_j [ -J a_j† a_{j+1} + Delta a_j a_{j+1} + h.c. ] - mu sum_j a_j† a_j
// Closed chains add the n-1 -> 0 link with the same (J, Delta) and ordering.
QuadraticHamiltonian kitaev_chain(int n, double J, double Delta, double mu,
                                  bool closed = false);

// Harmonic confinement sampled at the sites of one wire of length L:
//   V(j) = strength * ((L+1)/2 - j)^2 / L^2,  j = 1..L  (site index 1-based).
// Added as +V(j) a†a on every site of every wire.
struct TrapPotential {
    double strength = 0.0;
    double value(int length, int site) const {
        double d = 0.5 * (length + 1) - site;
        return strength * d * d / (double(length) * double(length));
    }
};
void add_trap(QuadraticHamiltonian& h, const WireNetwork& net, TrapPotential trap);

// Imperfection knobs shared by the protocols. All default to zero (ideal).
//   delta_perp: fraction of a switched inter-wire coupling leaking onto the
//               neighboring column rung
//   delta_k:    fractional reduction of the next intra-wire link while the
//               addressed link is held off
//   delta_v:    fraction of a switched local potential leaking onto
//               geometric neighbor sites
//   mu_disorder: half-width of uniform on-site chemical-potential disorder
//   laser_lag:  fractional timing offset between switch-off and switch-on
//               ramp channels (endpoints preserved)
//   intensity_leak: fractional addressed-potential intensity on neighbor
//               sites (single-site addressing accuracy)
struct ErrorModel {
    double delta_perp = 0.0;
    double delta_k = 0.0;
    double delta_v = 0.0;
    double mu_disorder = 0.0;
    double laser_lag = 0.0;
    double intensity_leak = 0.0;
    std::uint64_t seed = 0;

    bool any() const {
        return delta_perp != 0 || delta_k != 0 || delta_v != 0 ||
               mu_disorder != 0 || laser_lag != 0 || intensity_leak != 0;
    }
};

// Deterministic uniform draws in [-range, range]; identical across platforms
// for a given seed (53-bit mantissa mapping, no library distributions).
std::vector<double> disorder_draws(int n, double range, std::uint64_t seed);

}  // namespace wiresim
