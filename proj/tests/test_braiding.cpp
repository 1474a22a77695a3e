#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wiresim/bdg.hpp"
#include "wiresim/braiding.hpp"
#include "wiresim/fock.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace wiresim;
using Eigen::MatrixXd;

namespace {

BraidSpec ideal_spec(int length, double Delta = 1.0) {
    BraidSpec s;
    s.length = length;
    s.upper = {1.0, Delta, 0.0};
    s.lower = {1.0, Delta, 0.0};
    // Flat-transport-gap couplings; see the BraidSpec defaults.
    s.J_perp = 1.0 + Delta;
    s.V = 1.0 + Delta;
    s.t_step = 10.0;
    return s;
}

// The protocol Hamiltonian restated on the exact Fock space, for the
// dual-route dynamics check at small size.
fock::MatrixXcd fock_hamiltonian_at(const Protocol& p, int step, double tau) {
    return fock::hamiltonian(p.hamiltonian_at(step, tau));
}

}  // namespace

TEST_CASE("braid protocol: four steps, continuity, exact restoration") {
    const WireNetwork net{2, 12, {1}};
    const std::vector<WireParams> wires{{1.0, 1.5, 0.0}, {1.0, 1.5, 0.0}};

    for (const auto dir : {BraidDirection::Lower, BraidDirection::Upper}) {
        const Protocol p = braid_protocol(net, wires, 1.0, 1.0, dir, {0, 1, false},
                                          TrapPotential{}, ErrorModel{}, RampShape::Trig);
        REQUIRE(p.steps.size() == 4);
        CHECK_NOTHROW(p.validate_continuity());

        // After the full cycle the Hamiltonian is back to the decoupled pair
        // of chains it started from.
        const MajoranaForm begin = p.at(0, 0.0);
        const MajoranaForm end = p.at(3, 1.0);
        CHECK((begin.A - end.A).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(begin.offset == doctest::Approx(end.offset));
    }
}

TEST_CASE("braid protocol: term-level effect of each cross-talk knob") {
    const WireNetwork net{2, 12, {1}};
    const int L = net.length;
    const std::vector<WireParams> wires{{1.0, 1.5, 0.0}, {1.0, 1.5, 0.0}};
    const double J_perp = 0.8, V = 1.0;

    SUBCASE("rung leak copies every inter-wire term onto the next column") {
        ErrorModel err;
        err.delta_perp = 0.3;
        const Protocol p = braid_protocol(net, wires, J_perp, V, BraidDirection::Lower,
                                          {0, 1, false}, TrapPotential{}, err, RampShape::Trig);
        // Step 1 switches the edge-column rung hopping on; the copy couples
        // the second column of both wires at 0.3 of the amplitude.
        int found = 0;
        for (const auto& st : p.steps[0].terms) {
            if (st.term.kind == TermKind::Hopping && st.term.a == 1 && st.term.b == L + 1) {
                CHECK(st.term.amp == doctest::Approx(-0.3 * J_perp));
                CHECK(st.ramp == Ramp::SwitchOn);
                ++found;
            }
        }
        CHECK(found == 1);
    }

    SUBCASE("edge-switch leak holds the second link at reduced strength") {
        ErrorModel err;
        err.delta_k = 0.7;
        const Protocol p = braid_protocol(net, wires, J_perp, V, BraidDirection::Lower,
                                          {0, 1, false}, TrapPotential{}, err, RampShape::Trig);
        CHECK_NOTHROW(p.validate_continuity());
        // Mid-step 0 the upper edge link is at cos(pi/4); the (2,3) link
        // tracks it at 1 - 0.7 (1 - cos(pi/4)).
        const QuadraticHamiltonian h = p.hamiltonian_at(0, 0.5);
        const double c = std::sqrt(0.5);
        double hop_23 = 0.0;
        for (const auto& t : h.terms)
            if (t.kind == TermKind::Hopping && t.a == 1 && t.b == 2) hop_23 += t.amp;
        CHECK(hop_23 == doctest::Approx(-(0.3 + 0.7 * c)));
    }

    SUBCASE("addressing leak copies the clearing potential onto neighbors") {
        ErrorModel err;
        err.delta_v = 0.2;
        const Protocol p = braid_protocol(net, wires, J_perp, V, BraidDirection::Lower,
                                          {0, 1, false}, TrapPotential{}, err, RampShape::Trig);
        const QuadraticHamiltonian h = p.hamiltonian_at(2, 1.0);
        double on_edge = 0.0, on_next = 0.0, on_partner = 0.0;
        for (const auto& t : h.terms) {
            if (t.kind != TermKind::Potential) continue;
            if (t.a == 0) on_edge += t.amp;
            if (t.a == 1) on_next += t.amp;
            if (t.a == L) on_partner += t.amp;
        }
        CHECK(on_edge == doctest::Approx(2.0 * V));
        CHECK(on_next == doctest::Approx(0.2 * 2.0 * V));
        CHECK(on_partner == doctest::Approx(0.2 * 2.0 * V));
    }
}

TEST_CASE("braid protocol: analytic gap estimates where defined") {
    const WireNetwork net{2, 8, {1}};
    const std::vector<WireParams> wires{{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}};
    const double J_perp = 0.3, V = 0.9;
    const Protocol p = braid_protocol(net, wires, J_perp, V, BraidDirection::Lower, {0, 1, false},
                                      TrapPotential{}, ErrorModel{}, RampShape::Trig);

    REQUIRE(p.steps[0].gap_estimate);
    CHECK_FALSE(p.steps[1].gap_estimate);
    REQUIRE(p.steps[2].gap_estimate);
    REQUIRE(p.steps[3].gap_estimate);

    const double c = std::sqrt(0.5);
    // First step interpolates between the edge link and the rung.
    CHECK(p.steps[0].gap_estimate(0.0) == doctest::Approx(1.0));
    CHECK(p.steps[0].gap_estimate(1.0) == doctest::Approx(J_perp));
    CHECK(p.steps[0].gap_estimate(0.5) == doctest::Approx(std::hypot(c, J_perp * c)));
    // With matched amplitudes the estimate is flat.
    const Protocol q = braid_protocol(net, wires, 1.0, V, BraidDirection::Lower, {0, 1, false},
                                      TrapPotential{}, ErrorModel{}, RampShape::Trig);
    CHECK(q.steps[0].gap_estimate(0.5) == doctest::Approx(1.0));

    // Clearing steps: twice the rung/potential quadrature, capped by the
    // re-formed edge link.
    CHECK(p.steps[2].gap_estimate(0.0) == doctest::Approx(2.0 * J_perp));
    CHECK(p.steps[2].gap_estimate(1.0) == doctest::Approx(1.0));  // min(J, 2V)
    CHECK(p.steps[3].gap_estimate(0.0) == doctest::Approx(1.0));
    CHECK(p.steps[3].gap_estimate(1.0) == doctest::Approx(2.0 * J_perp));
}

TEST_CASE("braid protocol: invalid setups are rejected") {
    const WireNetwork net{3, 8, {1}};
    const std::vector<WireParams> wires(3, WireParams{});
    CHECK_THROWS_AS(braid_protocol(net, wires, 1.0, 1.0, BraidDirection::Lower, {0, 2, false},
                                   TrapPotential{}, ErrorModel{}, RampShape::Trig),
                    std::invalid_argument);
    CHECK_THROWS_AS(braid_protocol(net, wires, 1.0, 1.0, BraidDirection::Lower, {2, 3, false},
                                   TrapPotential{}, ErrorModel{}, RampShape::Trig),
                    std::invalid_argument);
    const std::vector<WireParams> two(2, WireParams{});
    CHECK_THROWS_AS(braid_protocol(net, two, 1.0, 1.0, BraidDirection::Lower, {0, 1, false},
                                   TrapPotential{}, ErrorModel{}, RampShape::Trig),
                    std::invalid_argument);

    BraidSpec bad = ideal_spec(8);
    bad.parity_upper = 0;
    CHECK_THROWS_AS(build_braid(bad), std::invalid_argument);
}

TEST_CASE("ideal braid moves the left zero mode across wires") {
    BraidSpec spec = ideal_spec(20, 1.5);
    BraidRunOptions opt;
    opt.evolve.samples_per_step = 8;
    const BraidResult r = run_braid(spec, opt);

    // At the start the frozen-frame correlators are the same-wire ones.
    REQUIRE(!r.trajectory.empty());
    CHECK(std::abs(r.trajectory.front().uu) > 0.99);
    CHECK(std::abs(r.trajectory.front().ll) > 0.99);

    // After the exchange the pairing is fully cross-wire.
    CHECK(std::abs(r.lu) > 0.999);
    CHECK(std::abs(r.ul) > 0.999);
    CHECK(std::abs(r.uu) < 0.01);
    CHECK(std::abs(r.ll) < 0.01);
    CHECK(r.braid_error < 1e-3);

    // The final state is the quarter-turn of the initial one in the plane of
    // the two left modes, and the wire parities are maximally undetermined
    // while the joint parity survives.
    CHECK(r.fidelity_rotation > 0.999);
    CHECK(std::abs(r.parity_upper) < 0.02);
    CHECK(std::abs(r.parity_lower) < 0.02);
    CHECK(r.total_parity == 1);
}

TEST_CASE("mirrored exchange inverts the braid") {
    BraidSpec spec = ideal_spec(16, 1.5);
    const BraidResult forth = run_braid(spec);

    BraidSpec back = spec;
    back.direction = BraidDirection::Upper;
    BraidRunOptions opt;
    opt.initial_gamma = forth.gamma;
    const BraidResult round = run_braid(back, opt);

    CHECK(round.fidelity_initial > 0.999);
    CHECK(std::abs(round.uu) > 0.999);
    CHECK(std::abs(round.ll) > 0.999);
    CHECK(round.parity_upper == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(round.parity_lower == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("direction inversion: time-reversed schedule undoes the exchange") {
    // Running the exchange and then its exact schedule reverse is an
    // adiabatic echo: the quarter turn is undone and the state returns.
    auto echo = [](double t_step) {
        BraidSpec spec = ideal_spec(12, 1.5);
        spec.t_step = t_step;
        const BraidSetup setup = build_braid(spec);
        const Protocol reverse = time_reversed(setup.protocol);
        Eigen::MatrixXd g = evolve_protocol(setup.protocol, setup.gamma0, t_step, {});
        g = evolve_protocol(reverse, g, t_step, {});
        return overlap_sq(g, setup.gamma0);
    };
    // At the default step duration the return fidelity is pace-limited to a
    // few 1e-4; doubling the duration reaches the 1e-4 class.
    CHECK(echo(10.0) > 0.999);
    CHECK(echo(20.0) > 1.0 - 1e-4);
}

TEST_CASE("repeating the exchange flips both wire parities") {
    BraidSpec spec = ideal_spec(16, 1.5);
    const DoubleBraidResult r = double_braid(spec);

    CHECK(r.parity_upper_before == doctest::Approx(1.0));
    CHECK(r.parity_lower_before == doctest::Approx(1.0));
    CHECK(std::abs(r.parity_upper_mid) < 0.02);
    CHECK(std::abs(r.parity_lower_mid) < 0.02);
    CHECK(r.parity_upper_after == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(r.parity_lower_after == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(r.total_parity_before == 1);
    CHECK(r.total_parity_after == 1);
}

TEST_CASE("braid dynamics agrees with exact many-body evolution at small size") {
    // Two 2-site wires: 4 sites, 16-dimensional Fock space. Drive one full
    // exchange and integrate the same protocol both ways.
    BraidSpec spec = ideal_spec(2, 1.0);
    spec.t_step = 2.0;
    const BraidSetup setup = build_braid(spec);

    // Fock route: the same initial state as a tensor product of per-wire
    // even-sector grounds (the joint even sector is degenerate here, so the
    // product has to be formed wire by wire).
    QuadraticHamiltonian wire(2);
    wire.add_kitaev_link(0, 1, 1.0, 1.0);
    const fock::VectorXcd even = fock::sector_grounds(wire).even.state;
    fock::VectorXcd psi(16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) psi(4 * i + j) = even(i) * even(j);
    CHECK((fock::covariance(psi, 4) - setup.gamma0).cwiseAbs().maxCoeff() < 1e-9);

    const double dt = 1e-4;
    Eigen::MatrixXd gamma = setup.gamma0;
    for (int step = 0; step < 4; ++step) {
        EvolveOptions opt;
        opt.dt = dt;
        Protocol one;
        one.n_sites = setup.protocol.n_sites;
        one.steps = {setup.protocol.steps[step]};
        one.laser_lag = setup.protocol.laser_lag;
        one.shape = setup.protocol.shape;
        gamma = evolve_protocol(one, std::move(gamma), spec.t_step, opt);
        const int s = step;
        psi = fock::evolve(
            [&, s](double t) { return fock_hamiltonian_at(setup.protocol, s, t / spec.t_step); },
            std::move(psi), 0.0, spec.t_step, dt);
    }

    CHECK((fock::covariance(psi, 4) - gamma).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single exchange from definite parities leaves them perfectly correlated") {
    BraidSpec spec = ideal_spec(2, 1.0);
    const BraidResult r = run_braid(spec);
    CHECK(std::abs(r.parity_upper) < 0.02);
    CHECK(std::abs(r.parity_lower) < 0.02);
    // The joint parity is a conserved quantity of the whole network.
    CHECK(r.total_parity == 1);
}

TEST_CASE("cross-talk robustness: rung and edge leaks alone stay topologically protected") {
    // The combined worst corner needs the slow regime: a uniform smoothstep
    // sweep long enough that the parasitic column-2 structure follows.
    BraidSpec spec = ideal_spec(20, 1.5);
    spec.t_step = 40.0;
    spec.schedule = BraidSchedule::Uniform;
    spec.shape = RampShape::Smooth;
    spec.errors.delta_perp = 0.3;
    spec.errors.delta_k = 0.7;
    const BraidResult r = run_braid(spec);
    CHECK(r.braid_error < 1e-4);
}

TEST_CASE("addressing leak degrades the braid monotonically") {
    BraidSpec base = ideal_spec(16, 1.5);
    base.t_step = 40.0;
    base.schedule = BraidSchedule::Uniform;
    base.shape = RampShape::Smooth;
    base.errors.delta_perp = 0.1;
    base.errors.delta_k = 0.2;
    const auto points = braid_error_sweep(base, {0.1}, {0.2}, {0.0, 0.1, 0.2}, 2);
    REQUIRE(points.size() == 3);
    CHECK(points[0].delta_v == 0.0);
    CHECK(points[2].delta_v == 0.2);
    CHECK(points[0].braid_error < 1e-4);
    CHECK(points[0].braid_error < points[1].braid_error);
    CHECK(points[1].braid_error < points[2].braid_error);
}

TEST_CASE("trapped wires still braid through the edge protocol") {
    BraidSpec spec = ideal_spec(20, 1.2);
    spec.trap = TrapPotential{1.0};
    const BraidResult r = run_braid(spec);
    CHECK(std::abs(r.lu) > 0.99);
    CHECK(std::abs(r.uu) < 0.05);
    CHECK(r.total_parity == 1);
}

TEST_CASE("smoothstep ramps build a valid protocol with exact endpoints") {
    CHECK(ramp_weight(Ramp::SwitchOff, 0.0, 0.0, RampShape::Smooth) == doctest::Approx(1.0));
    CHECK(ramp_weight(Ramp::SwitchOff, 1.0, 0.0, RampShape::Smooth) == doctest::Approx(0.0));
    CHECK(ramp_weight(Ramp::SwitchOn, 0.5, 0.0, RampShape::Smooth) ==
          doctest::Approx(std::sqrt(0.5)));
    BraidSpec spec = ideal_spec(10, 1.5);
    spec.shape = RampShape::Smooth;
    CHECK_NOTHROW(build_braid(spec));
}

TEST_CASE("gap-paced schedule: valid protocol, and a quieter braid at fixed duration") {
    BraidSpec paced = ideal_spec(12, 1.5);
    const BraidSetup setup = build_braid(paced);
    for (const ProtocolStep& st : setup.protocol.steps) {
        REQUIRE(st.phase_table.size() > 1);
        CHECK(st.phase_table.front() == 0.0);
        CHECK(st.phase_table.back() == doctest::Approx(std::acos(-1.0) / 2.0));
    }
    CHECK_NOTHROW(setup.protocol.validate_continuity());

    BraidSpec uniform = paced;
    uniform.schedule = BraidSchedule::Uniform;
    uniform.shape = RampShape::Smooth;
    const double e_paced = run_braid(paced).braid_error;
    const double e_uniform = run_braid(uniform).braid_error;
    CHECK(e_paced < 1e-3);
    CHECK(e_paced * 5.0 < e_uniform);
}

TEST_CASE("three-wire exchanges: adjacent-pair words act on wire parities") {
    NonabelianSpec spec;
    spec.length = 8;
    spec.wire = {1.0, 1.0, 0.0};
    spec.t_step = 10.0;

    const NonabelianResult none = nonabelian_demo(spec, {});
    REQUIRE(none.parity.size() == 3);
    CHECK(none.parity[0] == doctest::Approx(1.0));
    CHECK(none.parity[1] == doctest::Approx(1.0));
    CHECK(none.parity[2] == doctest::Approx(1.0));

    // Exchanging the first pair twice flips exactly those two wires.
    const NonabelianResult twice = nonabelian_demo(spec, {0, 0});
    CHECK(twice.parity[0] == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(twice.parity[1] == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(twice.parity[2] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(twice.total_parity == 1);

    CHECK_THROWS_AS(nonabelian_demo(spec, {2}), std::invalid_argument);
}
