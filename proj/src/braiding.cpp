#include "wiresim/braiding.hpp"

#include "wiresim/sweep.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

namespace wiresim {

namespace {

constexpr double nan_d = std::numeric_limits<double>::quiet_NaN();

// State of an addressed coupling over one protocol step.
enum class LinkState { Off, On, TurningOff, TurningOn };

Ramp to_ramp(LinkState s) {
    switch (s) {
        case LinkState::On: return Ramp::Const;
        case LinkState::TurningOff: return Ramp::SwitchOff;
        case LinkState::TurningOn: return Ramp::SwitchOn;
        case LinkState::Off: break;
    }
    throw std::logic_error("to_ramp: coupling is off");
}

std::vector<int> wire_sites(int wire, int length) {
    std::vector<int> sites(length);
    for (int j = 0; j < length; ++j) sites[j] = wire * length + j;
    return sites;
}

}  // namespace

Protocol braid_protocol(const WireNetwork& net, const std::vector<WireParams>& wires,
                        double J_perp, double V, BraidDirection direction, BraidGeometry geo,
                        TrapPotential trap, const ErrorModel& errors, RampShape shape,
                        BraidSchedule schedule) {
    const int L = net.length;
    if (L < 2) throw std::invalid_argument("braid_protocol: wires need at least 2 sites");
    if (static_cast<int>(wires.size()) != net.wires)
        throw std::invalid_argument("braid_protocol: one WireParams entry per wire required");
    if (geo.wire_a < 0 || geo.wire_b != geo.wire_a + 1 || geo.wire_b >= net.wires)
        throw std::invalid_argument("braid_protocol: exchange needs vertically adjacent wires");

    // Column coordinates of the addressed edge and its inward neighbor.
    const int c1 = geo.right_end ? L : 1;
    const int c2 = geo.right_end ? L - 1 : 2;
    // Addressed edge link and the next link inward (1-based lower site of
    // each (j, j+1) pair). All intra-wire links are built in ascending site
    // order so the pairing sign convention is identical in every step.
    const int edge_link = geo.right_end ? L - 1 : 1;
    const int next_link = geo.right_end ? L - 2 : 2;

    const auto flat = [&](int w, int j) { return net.flatten({w, j}); };

    const auto add_link = [&](std::vector<ScheduledTerm>& ts, int w, int j, double scale,
                              Ramp r) {
        const int lo = flat(w, j), hi = flat(w, j + 1);
        ts.push_back({QuadraticTerm{TermKind::Hopping, lo, hi, -wires[w].J * scale}, r});
        ts.push_back({QuadraticTerm{TermKind::Pairing, lo, hi, wires[w].Delta * scale}, r});
    };

    const std::vector<double> draws = disorder_draws(net.size(), errors.mu_disorder, errors.seed);

    // Everything that is not protocol-addressed: bulk links (with the
    // delta_k cross talk on the link next to an addressed edge), chemical
    // potentials, disorder, and the trap.
    const auto background = [&](std::vector<ScheduledTerm>& ts, LinkState edge_a,
                                LinkState edge_b) {
        for (int w = 0; w < net.wires; ++w) {
            const bool addressed = (w == geo.wire_a || w == geo.wire_b);
            const LinkState edge = (w == geo.wire_a) ? edge_a : edge_b;
            for (int j = 1; j < L; ++j) {
                if (addressed && j == edge_link) {
                    if (edge != LinkState::Off) add_link(ts, w, j, 1.0, to_ramp(edge));
                } else if (addressed && j == next_link && errors.delta_k != 0.0) {
                    // Edge link held at weight x scales this link by
                    // 1 - delta_k (1 - x).
                    add_link(ts, w, j, 1.0 - errors.delta_k, Ramp::Const);
                    if (edge != LinkState::Off) add_link(ts, w, j, errors.delta_k, to_ramp(edge));
                } else {
                    add_link(ts, w, j, 1.0, Ramp::Const);
                }
            }
            for (int j = 1; j <= L; ++j) {
                const double pot = -wires[w].mu - draws[flat(w, j)] + trap.value(L, j);
                const int s = flat(w, j);
                if (pot != 0.0)
                    ts.push_back({QuadraticTerm{TermKind::Potential, s, s, pot}, Ramp::Const});
            }
        }
    };

    // Inter-wire terms on the edge rung, with delta_perp-scaled copies on
    // the neighboring column's rung. The mirrored (Upper) exchange writes
    // the pairing in the opposite site order, i.e. with a flipped sign.
    const bool lower = direction == BraidDirection::Lower;
    const int sa1 = flat(geo.wire_a, c1), sb1 = flat(geo.wire_b, c1);
    const int sa2 = flat(geo.wire_a, c2), sb2 = flat(geo.wire_b, c2);
    const double hop_amp = -J_perp;
    const double pair_amp = lower ? J_perp : -J_perp;

    const auto add_rung = [&](std::vector<ScheduledTerm>& ts, TermKind kind, double amp,
                              Ramp r) {
        ts.push_back({QuadraticTerm{kind, sa1, sb1, amp}, r});
        if (errors.delta_perp != 0.0)
            ts.push_back({QuadraticTerm{kind, sa2, sb2, errors.delta_perp * amp}, r});
    };

    // The potential 2V is raised on the edge site emptied by the exchange;
    // delta_v leaks copies onto its wire neighbor and its rung partner.
    const int pot_site = lower ? sa1 : sb1;
    const int pot_wire_nb = lower ? sa2 : sb2;
    const int pot_rung_nb = lower ? sb1 : sa1;

    const auto add_pot = [&](std::vector<ScheduledTerm>& ts, Ramp r) {
        ts.push_back({QuadraticTerm{TermKind::Potential, pot_site, pot_site, 2.0 * V}, r});
        if (errors.delta_v != 0.0) {
            const double leak = errors.delta_v * 2.0 * V;
            ts.push_back({QuadraticTerm{TermKind::Potential, pot_wire_nb, pot_wire_nb, leak}, r});
            ts.push_back({QuadraticTerm{TermKind::Potential, pot_rung_nb, pot_rung_nb, leak}, r});
        }
    };

    struct StepPlan {
        const char* label;
        LinkState edge_a, edge_b, rung_hop, rung_pair, pot;
    };
    using LS = LinkState;
    const std::array<StepPlan, 4> plan =
        lower ? std::array<StepPlan, 4>{{
                    {"extract", LS::TurningOff, LS::TurningOff, LS::TurningOn, LS::Off, LS::Off},
                    {"handoff", LS::Off, LS::TurningOn, LS::On, LS::TurningOn, LS::Off},
                    {"detach", LS::Off, LS::On, LS::TurningOff, LS::TurningOff, LS::TurningOn},
                    {"restore", LS::TurningOn, LS::On, LS::Off, LS::Off, LS::TurningOff},
                }}
              : std::array<StepPlan, 4>{{
                    {"extract", LS::TurningOff, LS::TurningOff, LS::TurningOn, LS::Off, LS::Off},
                    {"handoff", LS::TurningOn, LS::Off, LS::On, LS::TurningOn, LS::Off},
                    {"detach", LS::On, LS::Off, LS::TurningOff, LS::TurningOff, LS::TurningOn},
                    {"restore", LS::On, LS::TurningOn, LS::Off, LS::Off, LS::TurningOff},
                }};

    // The carried edge mode rides a three-Majorana chain a -t1- b -t2- c in
    // every step; its transport gap is hypot(t1, t2) with the chain ends set
    // by that step's switching amplitudes. |J + Delta| is the edge link's
    // Majorana weight, so it (not J alone) sets the link-side chain end.
    const double jd_a = std::abs(wires[geo.wire_a].J + wires[geo.wire_a].Delta);
    const double jd_b = std::abs(wires[geo.wire_b].J + wires[geo.wire_b].Delta);
    const double jd_first = lower ? jd_b : jd_a;  // link re-formed in step 1
    const double jd_last = lower ? jd_a : jd_b;   // link re-formed in step 3
    const std::array<std::function<double(double)>, 4> chain_gap = {
        [=](double phi) {
            return std::hypot(std::min(jd_a, jd_b) * std::cos(phi), J_perp * std::sin(phi));
        },
        [=](double phi) {
            return std::hypot(J_perp * (1.0 - std::sin(phi)), jd_first * std::sin(phi));
        },
        [=](double phi) { return 2.0 * std::hypot(J_perp * std::cos(phi), V * std::sin(phi)); },
        [=](double phi) { return std::hypot(2.0 * V * std::cos(phi), jd_last * std::sin(phi)); },
    };
    std::array<std::vector<double>, 4> tables{};
    if (schedule == BraidSchedule::GapPaced)
        for (int k = 0; k < 4; ++k) tables[k] = paced_phase_table(chain_gap[k]);

    // Analytic gap estimates for the steps where the reduced edge problem
    // gives a self-consistent closed form; the parked-fermion step is left
    // to the spectral gap. J_keep is the re-formed edge link's amplitude;
    // the estimates track the actual (possibly paced) switch angle.
    const double J_keep = lower ? wires[geo.wire_b].J : wires[geo.wire_a].J;
    const auto mk_gap = [shape](std::function<double(double, double)> f, std::vector<double> tab) {
        return [shape, f = std::move(f), tab = std::move(tab)](double tau) {
            const std::vector<double>* t = tab.empty() ? nullptr : &tab;
            return f(ramp_weight(Ramp::SwitchOff, tau, 0.0, shape, t),
                     ramp_weight(Ramp::SwitchOn, tau, 0.0, shape, t));
        };
    };
    const std::array<std::function<double(double)>, 4> gap = {
        mk_gap([=](double c, double s) { return std::hypot(J_keep * c, J_perp * s); }, tables[0]),
        nullptr,
        mk_gap([=](double c, double s) { return std::min(J_keep, 2.0 * std::hypot(J_perp * c, V * s)); },
               tables[2]),
        mk_gap([=](double c, double s) { return std::min(J_keep, 2.0 * std::hypot(V * c, J_perp * s)); },
               tables[3]),
    };

    Protocol p;
    p.n_sites = net.size();
    p.laser_lag = errors.laser_lag;
    p.shape = shape;
    for (int k = 0; k < 4; ++k) {
        ProtocolStep st;
        st.label = plan[k].label;
        background(st.terms, plan[k].edge_a, plan[k].edge_b);
        if (plan[k].rung_hop != LS::Off)
            add_rung(st.terms, TermKind::Hopping, hop_amp, to_ramp(plan[k].rung_hop));
        if (plan[k].rung_pair != LS::Off)
            add_rung(st.terms, TermKind::Pairing, pair_amp, to_ramp(plan[k].rung_pair));
        if (plan[k].pot != LS::Off) add_pot(st.terms, to_ramp(plan[k].pot));
        st.gap_estimate = gap[k];
        st.phase_table = std::move(tables[k]);
        p.steps.push_back(std::move(st));
    }
    p.validate_continuity();
    return p;
}

BraidSetup build_braid(const BraidSpec& spec) {
    if (spec.length < 2) throw std::invalid_argument("build_braid: length must be >= 2");
    if (std::abs(spec.parity_upper) != 1 || std::abs(spec.parity_lower) != 1)
        throw std::invalid_argument("build_braid: wire parities must be +1 or -1");

    BraidSetup s;
    s.net = WireNetwork{2, spec.length, {1}};
    const std::vector<WireParams> wires{spec.upper, spec.lower};
    s.protocol = braid_protocol(s.net, wires, spec.J_perp, spec.V, spec.direction,
                                BraidGeometry{0, 1, false}, spec.trap, spec.errors, spec.shape,
                                spec.schedule);

    // Initial state: each decoupled wire in the requested parity sector of
    // its own background Hamiltonian (chain + potentials + trap + disorder).
    const int L = spec.length;
    const std::vector<double> draws =
        disorder_draws(s.net.size(), spec.errors.mu_disorder, spec.errors.seed);
    const int sector[2] = {spec.parity_upper, spec.parity_lower};
    s.gamma0 = Eigen::MatrixXd::Zero(4 * L, 4 * L);
    for (int w = 0; w < 2; ++w) {
        QuadraticHamiltonian hw(L);
        for (int j = 0; j + 1 < L; ++j) hw.add_kitaev_link(j, j + 1, wires[w].J, wires[w].Delta);
        for (int j = 0; j < L; ++j) {
            const double pot = -wires[w].mu - draws[w * L + j] + spec.trap.value(L, j + 1);
            if (pot != 0.0) hw.add_potential(j, pot);
        }
        const MajoranaForm f = hw.to_majorana();
        s.gamma0.block(2 * L * w, 2 * L * w, 2 * L, 2 * L) =
            ground_state(canonical_modes(f), sector[w]).gamma;

        // Trap and disorder enlarge the residual splitting, so accept any
        // lowest pair well below the wire's coupling scale; the profile's
        // energy field reports the actual value.
        const ZeroModeProfile zm = majorana_zero_modes(f, L, 0.1 * std::abs(wires[w].J) + 1e-9);
        Eigen::VectorXd vl = Eigen::VectorXd::Zero(4 * L);
        Eigen::VectorXd vr = Eigen::VectorXd::Zero(4 * L);
        vl.segment(2 * L * w, 2 * L) = zm.left;
        vr.segment(2 * L * w, 2 * L) = zm.right;
        if (w == 0) {
            s.v_left_upper = std::move(vl);
            s.v_right_upper = std::move(vr);
            s.split_upper = zm.energy;
        } else {
            s.v_left_lower = std::move(vl);
            s.v_right_lower = std::move(vr);
            s.split_lower = zm.energy;
        }
    }
    return s;
}

namespace {

// Quarter-turn of the covariance in the plane of the two exchanged modes:
// e1 -> chi e2, e2 -> -chi e1, identity elsewhere.
Eigen::MatrixXd quarter_turn(const Eigen::MatrixXd& gamma0, const Eigen::VectorXd& e1,
                             const Eigen::VectorXd& e2, int chi) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(gamma0.rows(), gamma0.cols());
    r -= e1 * e1.transpose();
    r -= e2 * e2.transpose();
    r += chi * (e2 * e1.transpose() - e1 * e2.transpose());
    return r * gamma0 * r.transpose();
}

}  // namespace

BraidResult run_braid(const BraidSpec& spec, const BraidRunOptions& opt) {
    const BraidSetup setup = build_braid(spec);
    const int n_maj = 2 * setup.net.size();
    Eigen::MatrixXd gamma = opt.initial_gamma ? *opt.initial_gamma : setup.gamma0;
    if (gamma.rows() != n_maj || gamma.cols() != n_maj)
        throw std::invalid_argument("run_braid: initial covariance has wrong dimension");

    BraidResult res;
    res.gamma0 = setup.gamma0;

    const auto correlators = [&](const Eigen::MatrixXd& g, BraidSample& row) {
        row.uu = correlation(g, setup.v_left_upper, setup.v_right_upper);
        row.ll = correlation(g, setup.v_left_lower, setup.v_right_lower);
        row.lu = correlation(g, setup.v_left_lower, setup.v_right_upper);
        row.ul = correlation(g, setup.v_left_upper, setup.v_right_lower);
    };

    double min_gap = std::numeric_limits<double>::infinity();
    SampleFn sampler;
    if (opt.evolve.samples_per_step > 0) {
        sampler = [&](int step, double tau, double t, const Eigen::MatrixXd& g) {
            BraidSample row;
            row.step = step;
            row.tau = tau;
            row.t = t;
            correlators(g, row);
            const MajoranaForm f = setup.protocol.at(step, tau);
            row.energy = energy_expectation(f, g);
            const auto& gap_fn = setup.protocol.steps[step].gap_estimate;
            row.gap_formula = gap_fn ? gap_fn(tau) : nan_d;
            row.gap_spectral = nan_d;
            if (opt.track_gap) {
                row.gap_spectral = quasiparticle_energies(f.A)(setup.net.wires);
                min_gap = std::min(min_gap, row.gap_spectral);
            }
            res.trajectory.push_back(row);
        };
    }

    gamma = evolve_protocol(setup.protocol, std::move(gamma), spec.t_step, opt.evolve, sampler);

    BraidSample fin;
    correlators(gamma, fin);
    res.uu = fin.uu;
    res.ll = fin.ll;
    res.lu = fin.lu;
    res.ul = fin.ul;
    res.braid_error = 1.0 - std::abs(res.lu);
    res.parity_upper = parity_expectation(gamma, wire_sites(0, spec.length));
    res.parity_lower = parity_expectation(gamma, wire_sites(1, spec.length));
    res.total_parity = parity(gamma);
    res.fidelity_initial = overlap_sq(gamma, setup.gamma0);
    res.fidelity_rotation = std::max(
        overlap_sq(gamma, quarter_turn(setup.gamma0, setup.v_left_upper, setup.v_left_lower, +1)),
        overlap_sq(gamma, quarter_turn(setup.gamma0, setup.v_left_upper, setup.v_left_lower, -1)));
    res.min_gap_spectral = opt.track_gap ? min_gap : nan_d;
    res.gamma = std::move(gamma);
    return res;
}

DoubleBraidResult double_braid(const BraidSpec& spec, const BraidRunOptions& opt) {
    DoubleBraidResult r;
    r.first = run_braid(spec, opt);
    BraidRunOptions second = opt;
    second.initial_gamma = r.first.gamma;
    r.second = run_braid(spec, second);

    r.parity_upper_before = parity_expectation(r.first.gamma0, wire_sites(0, spec.length));
    r.parity_lower_before = parity_expectation(r.first.gamma0, wire_sites(1, spec.length));
    r.parity_upper_mid = r.first.parity_upper;
    r.parity_lower_mid = r.first.parity_lower;
    r.parity_upper_after = r.second.parity_upper;
    r.parity_lower_after = r.second.parity_lower;
    r.total_parity_before = parity(r.first.gamma0);
    r.total_parity_after = r.second.total_parity;
    return r;
}

std::vector<BraidErrorPoint> braid_error_sweep(const BraidSpec& base,
                                               const std::vector<double>& deltas_perp,
                                               const std::vector<double>& deltas_k,
                                               const std::vector<double>& deltas_v, int jobs,
                                               const BraidRunOptions& opt) {
    const int nk = static_cast<int>(deltas_k.size());
    const int np = static_cast<int>(deltas_perp.size());
    const int nv = static_cast<int>(deltas_v.size());
    if (nk == 0 || np == 0 || nv == 0)
        throw std::invalid_argument("braid_error_sweep: empty grid axis");

    std::vector<BraidErrorPoint> out(static_cast<std::size_t>(nk) * np * nv);
    parallel_for_indexed(static_cast<int>(out.size()), jobs, [&](int i) {
        const int ik = i % nk;
        const int ip = (i / nk) % np;
        const int iv = i / (nk * np);
        BraidSpec s = base;
        s.errors.delta_perp = deltas_perp[ip];
        s.errors.delta_k = deltas_k[ik];
        s.errors.delta_v = deltas_v[iv];
        BraidRunOptions o = opt;
        o.evolve.samples_per_step = 0;
        o.track_gap = false;
        o.initial_gamma.reset();
        const BraidResult r = run_braid(s, o);
        out[i] = BraidErrorPoint{deltas_perp[ip], deltas_k[ik], deltas_v[iv], r.braid_error, r.lu};
    });
    return out;
}

NonabelianResult nonabelian_demo(const NonabelianSpec& spec, const std::vector<int>& word,
                                 const EvolveOptions& opt) {
    if (spec.length < 2) throw std::invalid_argument("nonabelian_demo: length must be >= 2");
    const int L = spec.length;
    const WireNetwork net{3, L, {L}};
    const std::vector<WireParams> wires(3, spec.wire);
    const std::vector<double> draws =
        disorder_draws(net.size(), spec.errors.mu_disorder, spec.errors.seed);

    // All-even initial product state.
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(6 * L, 6 * L);
    for (int w = 0; w < 3; ++w) {
        QuadraticHamiltonian hw(L);
        for (int j = 0; j + 1 < L; ++j) hw.add_kitaev_link(j, j + 1, spec.wire.J, spec.wire.Delta);
        for (int j = 0; j < L; ++j) {
            const double pot = -spec.wire.mu - draws[w * L + j];
            if (pot != 0.0) hw.add_potential(j, pot);
        }
        gamma.block(2 * L * w, 2 * L * w, 2 * L, 2 * L) =
            ground_state(canonical_modes(hw.to_majorana()), +1).gamma;
    }

    // Each word entry is one full four-step exchange on the right ends of
    // the named adjacent wire pair.
    for (const int a : word) {
        if (a != 0 && a != 1)
            throw std::invalid_argument("nonabelian_demo: word entries must be 0 or 1");
        const Protocol p = braid_protocol(net, wires, spec.J_perp, spec.V, BraidDirection::Lower,
                                          BraidGeometry{a, a + 1, true}, TrapPotential{},
                                          spec.errors, spec.shape, spec.schedule);
        gamma = evolve_protocol(p, std::move(gamma), spec.t_step, opt);
    }

    NonabelianResult res;
    for (int w = 0; w < 3; ++w) res.parity.push_back(parity_expectation(gamma, wire_sites(w, L)));
    res.total_parity = parity(gamma);
    res.gamma = std::move(gamma);
    return res;
}

}  // namespace wiresim
