#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wiresim/bdg.hpp"
#include "wiresim/fock.hpp"
#include "wiresim/lattice.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace wiresim;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Independent Pfaffian: cofactor expansion along the first row. O(n!!), for
// cross-validating the production elimination algorithm at small sizes.
double pf_recursive(const MatrixXd& a) {
    const Eigen::Index n = a.rows();
    if (n == 0) return 1.0;
    double s = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
        if (a(0, j) == 0.0) continue;
        MatrixXd m(n - 2, n - 2);
        Eigen::Index rr = 0;
        for (Eigen::Index r = 1; r < n; ++r) {
            if (r == j) continue;
            Eigen::Index cc = 0;
            for (Eigen::Index c = 1; c < n; ++c) {
                if (c == j) continue;
                m(rr, cc++) = a(r, c);
            }
            ++rr;
        }
        s += (j % 2 == 1 ? 1.0 : -1.0) * a(0, j) * pf_recursive(m);
    }
    return s;
}

MatrixXd random_skew(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&] { return 2.0 * (double(rng() >> 11) * 0x1p-53) - 1.0; };
    MatrixXd a = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            a(i, j) = u();
            a(j, i) = -a(i, j);
        }
    return a;
}

}  // namespace

TEST_CASE("pfaffian: frozen values, cofactor cross-check, Pf^2 = det") {
    MatrixXd two(2, 2);
    two << 0, 3, -3, 0;
    CHECK(pfaffian(two) == doctest::Approx(3.0));

    MatrixXd four = MatrixXd::Zero(4, 4);
    four(0, 1) = 1;
    four(0, 2) = 2;
    four(0, 3) = 3;
    four(1, 2) = 4;
    four(1, 3) = 5;
    four(2, 3) = 6;
    four -= MatrixXd(four.transpose());
    // a01 a23 - a02 a13 + a03 a12 = 6 - 10 + 12
    CHECK(pfaffian(four) == doctest::Approx(8.0).epsilon(1e-12));

    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        MatrixXd a = random_skew(8, seed);
        const double pf = pfaffian(a);
        CHECK(pf == doctest::Approx(pf_recursive(a)).epsilon(1e-10));
        CHECK(pf * pf == doctest::Approx(a.determinant()).epsilon(1e-9));
    }

    CHECK(pfaffian(MatrixXd::Zero(4, 4)) == 0.0);
    CHECK_THROWS_AS(pfaffian(MatrixXd::Zero(3, 3)), std::invalid_argument);
    CHECK_THROWS_AS(pfaffian(MatrixXd::Ones(4, 4)), std::invalid_argument);
}

TEST_CASE("canonical modes: reconstruction, ordering, SVD agreement") {
    for (std::uint64_t seed : {11u, 12u}) {
        MatrixXd a = random_skew(12, seed);
        CanonicalModes cm = canonical_modes({a, 0.25});
        CHECK(cm.offset == 0.25);
        const Eigen::Index n = a.rows();
        CHECK((cm.modes.transpose() * cm.modes - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
              1e-12);
        for (Eigen::Index i = 0; i + 1 < cm.energies.size(); ++i) {
            CHECK(cm.energies(i) >= 0.0);
            CHECK(cm.energies(i) <= cm.energies(i + 1));
        }
        // A = O D O^T with the block convention u^T A w = -e.
        MatrixXd d = MatrixXd::Zero(n, n);
        for (Eigen::Index nu = 0; nu < n / 2; ++nu) {
            d(2 * nu, 2 * nu + 1) = -cm.energies(nu);
            d(2 * nu + 1, 2 * nu) = cm.energies(nu);
        }
        CHECK((cm.modes * d * cm.modes.transpose() - a).cwiseAbs().maxCoeff() < 1e-12);

        VectorXd sv = quasiparticle_energies(a);
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            CHECK(sv(i) == doctest::Approx(cm.energies(i)).epsilon(1e-10));
    }
}

TEST_CASE("ideal wire quasiparticle spectrum: one exact zero mode, rest at 2J") {
    // J = Delta, mu = 0, open chain: end Majoranas decouple exactly.
    const double J = 1.0;
    CanonicalModes cm = canonical_modes(kitaev_chain(8, J, J, 0.0).to_majorana());
    REQUIRE(cm.energies.size() == 8);
    CHECK(std::abs(cm.energies(0)) < 1e-12);
    for (int i = 1; i < 8; ++i) CHECK(cm.energies(i) == doctest::Approx(2.0 * J).epsilon(1e-12));
}

TEST_CASE("potential ladder: frozen ground energies, occupations, parity") {
    // H = 1 n_0 + 2 n_1 + 3 n_2: even ground = vacuum at E = 0,
    // odd ground occupies site 0 at E = 1.
    QuadraticHamiltonian h(3);
    h.add_potential(0, 1.0);
    h.add_potential(1, 2.0);
    h.add_potential(2, 3.0);
    CanonicalModes cm = canonical_modes(h.to_majorana());

    GaussianState even = ground_state(cm, +1);
    GaussianState odd = ground_state(cm, -1);
    CHECK(even.energy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(odd.energy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(parity(even.gamma) == 1);
    CHECK(parity(odd.gamma) == -1);
    for (int s = 0; s < 3; ++s) {
        CHECK(occupation(even.gamma, s) == doctest::Approx(0.0));
        CHECK(occupation(odd.gamma, s) == doctest::Approx(s == 0 ? 1.0 : 0.0));
    }
    CHECK(parity_expectation(even.gamma, {0}) == doctest::Approx(1.0));
    CHECK(parity_expectation(odd.gamma, {0}) == doctest::Approx(-1.0));
    CHECK(parity_expectation(odd.gamma, {1, 2}) == doctest::Approx(1.0));
}

TEST_CASE("gaussian sector grounds match the Fock oracle") {
    struct Params {
        int n;
        double J, D, mu;
        bool closed;
    };
    for (Params p : {Params{4, 1.0, 0.7, 0.3, false}, Params{5, 1.0, 1.5, -0.4, false},
                     Params{5, 1.0, 0.8, 0.2, true}, Params{6, 0.9, 0.6, 0.45, false}}) {
        CAPTURE(p.n);
        CAPTURE(p.mu);
        auto h = kitaev_chain(p.n, p.J, p.D, p.mu, p.closed);
        CanonicalModes cm = canonical_modes(h.to_majorana());
        auto oracle = fock::sector_grounds(h);

        GaussianState even = ground_state(cm, +1);
        GaussianState odd = ground_state(cm, -1);
        CHECK(even.energy == doctest::Approx(oracle.even.energy).epsilon(1e-10));
        CHECK(odd.energy == doctest::Approx(oracle.odd.energy).epsilon(1e-10));

        // The opposite-parity sector is reached by occupying the lowest
        // quasiparticle; if that mode is degenerate (closed rings: +-k pairs)
        // the sector ground manifold is 2d and its covariance not unique, so
        // only the vacuum-parity sector is compared state by state.
        const bool flip_unique = cm.energies(1) - cm.energies(0) > 1e-8;
        const int vac_parity = parity(ground_state(cm).gamma);
        auto comparable = [&](int sector) { return flip_unique || sector == vac_parity; };

        MatrixXd ge = fock::covariance(oracle.even.state, p.n);
        MatrixXd go = fock::covariance(oracle.odd.state, p.n);
        if (comparable(+1)) CHECK((even.gamma - ge).cwiseAbs().maxCoeff() < 1e-9);
        if (comparable(-1)) CHECK((odd.gamma - go).cwiseAbs().maxCoeff() < 1e-9);

        // Unconstrained ground = the lower of the two sectors.
        GaussianState g = ground_state(cm);
        CHECK(g.energy == doctest::Approx(std::min(oracle.even.energy, oracle.odd.energy))
                              .epsilon(1e-10));

        // Energy functional evaluated on the oracle covariance.
        MajoranaForm f = h.to_majorana();
        CHECK(energy_expectation(f, ge) == doctest::Approx(oracle.even.energy).epsilon(1e-10));
        CHECK(energy_expectation(f, go) == doctest::Approx(oracle.odd.energy).epsilon(1e-10));

        // Occupations agree site by site.
        if (comparable(+1))
            for (int s = 0; s < p.n; ++s)
                CHECK(occupation(even.gamma, s) ==
                      doctest::Approx(fock::occupation(oracle.even.state, p.n, s)).epsilon(1e-9));
    }
}

TEST_CASE("restricted parity matches the Fock string operator") {
    const int n = 4;
    auto h = kitaev_chain(n, 1.0, 0.7, 0.3);
    auto oracle = fock::sector_grounds(h);
    auto gamma_ops = fock::jw_majoranas(n);
    MatrixXd g = fock::covariance(oracle.even.state, n);

    for (const std::vector<int>& sites :
         {std::vector<int>{0}, std::vector<int>{1, 3}, std::vector<int>{0, 1, 2, 3}}) {
        MatrixXcd op = MatrixXcd::Identity(fock::dim(n), fock::dim(n));
        for (int s : sites)
            op = op * (std::complex<double>(0, 1) * gamma_ops[majorana_x(s)] * gamma_ops[majorana_y(s)]);
        const std::complex<double> want = oracle.even.state.dot(op * oracle.even.state);
        CHECK(std::abs(want.imag()) < 1e-10);
        CHECK(parity_expectation(g, sites) == doctest::Approx(want.real()).epsilon(1e-9));
    }
}

TEST_CASE("state overlap formula matches the Fock oracle") {
    const int n = 4;
    auto h1 = kitaev_chain(n, 1.0, 0.7, 0.3);
    auto h2 = kitaev_chain(n, 0.8, 1.1, -0.4);
    auto g1 = fock::sector_grounds(h1);
    auto g2 = fock::sector_grounds(h2);

    MatrixXd e1 = fock::covariance(g1.even.state, n), o1 = fock::covariance(g1.odd.state, n);
    MatrixXd e2 = fock::covariance(g2.even.state, n), o2 = fock::covariance(g2.odd.state, n);

    CHECK(overlap_sq(e1, e1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(overlap_sq(e1, e2) ==
          doctest::Approx(std::norm(g1.even.state.dot(g2.even.state))).epsilon(1e-9));
    CHECK(overlap_sq(o1, o2) ==
          doctest::Approx(std::norm(g1.odd.state.dot(g2.odd.state))).epsilon(1e-9));
    // Opposite parities are exactly orthogonal.
    CHECK(overlap_sq(e1, o2) < 1e-12);

    // Frozen two-site example: |<(|00>+|11>)/sqrt2 | 00>|^2 = 1/2.
    QuadraticHamiltonian vac(2);
    vac.add_potential(0, 1.0);
    vac.add_potential(1, 1.0);
    MatrixXd gv = ground_state(canonical_modes(vac.to_majorana()), +1).gamma;
    MatrixXd gb = ground_state(canonical_modes(kitaev_chain(2, 1, 1, 0).to_majorana()), +1).gamma;
    CHECK(overlap_sq(gv, gb) == doctest::Approx(0.5).epsilon(1e-10));

    CHECK_THROWS_AS(overlap_sq(MatrixXd::Zero(8, 8), e1), std::invalid_argument);
}

TEST_CASE("end zero modes of a dimerized wire") {
    // J = 1, Delta = 1.5: the bond dimerization ratio is |J-D|/(J+D) = 0.2,
    // and at mu = 0 the end mode is supported on every second site only, so
    // the per-site decay length is 2/ln(5) ~ 1.2427 sites.
    const int n = 20;
    MajoranaForm f = kitaev_chain(n, 1.0, 1.5, 0.0).to_majorana();
    ZeroModeProfile zm = majorana_zero_modes(f, n);

    CHECK(zm.energy >= 0.0);
    CHECK(zm.energy < 1e-5);
    CHECK(zm.left.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(zm.right.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(zm.left.dot(zm.right)) < 1e-9);

    // Localization on opposite ends.
    auto site_weight = [&](const VectorXd& v, int s) {
        return std::hypot(v(majorana_x(s)), v(majorana_y(s)));
    };
    CHECK(site_weight(zm.left, 0) > 0.9);
    CHECK(site_weight(zm.left, n - 1) < 1e-6);
    CHECK(site_weight(zm.right, n - 1) > 0.9);
    CHECK(site_weight(zm.right, 0) < 1e-6);

    CHECK(zm.xi_left == doctest::Approx(2.0 / std::log(5.0)).epsilon(0.01));
    CHECK(zm.xi_right == doctest::Approx(2.0 / std::log(5.0)).epsilon(0.01));
    CHECK(zm.r2_left > 0.999);
    CHECK(zm.r2_right > 0.999);

    // J = Delta: left mode is exactly the first Majorana, single-site support.
    ZeroModeProfile ideal = majorana_zero_modes(kitaev_chain(8, 1, 1, 0).to_majorana(), 8);
    CHECK(std::abs(ideal.energy) < 1e-12);
    CHECK(site_weight(ideal.left, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ideal.xi_left == 0.0);  // delta-localized: no decay scale

    // Gapped generic wire: lowest mode far from zero -> must throw.
    CHECK_THROWS_AS(majorana_zero_modes(kitaev_chain(8, 1, 0.5, 3.0).to_majorana(), 8),
                    std::runtime_error);
}

TEST_CASE("many-body levels assembled from quasiparticles match the Fock spectrum") {
    const int n = 5;
    auto h = kitaev_chain(n, 1.0, 0.63, 0.378);
    auto fock_levels = fock::spectrum(h);
    auto gauss_levels = many_body_spectrum(canonical_modes(h.to_majorana()), 16);
    REQUIRE(gauss_levels.size() == 16);

    // Parameters are generic: spectrum is nondegenerate, so parities can be
    // compared level by level.
    for (size_t k = 0; k + 1 < 16; ++k)
        REQUIRE(fock_levels[k + 1].energy - fock_levels[k].energy > 1e-7);
    for (size_t k = 0; k < 16; ++k) {
        CHECK(gauss_levels[k].energy == doctest::Approx(fock_levels[k].energy).epsilon(1e-9));
        CHECK(gauss_levels[k].parity == fock_levels[k].parity);
    }
    for (size_t k = 0; k + 1 < gauss_levels.size(); ++k)
        CHECK(gauss_levels[k].energy <= gauss_levels[k + 1].energy + 1e-12);
}
