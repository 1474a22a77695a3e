#include "wiresim/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace wiresim {

namespace {

void append_link(std::vector<ScheduledTerm>& ts, int a, int b, const KitaevCoupling& k,
                 Ramp ramp) {
    ts.push_back({QuadraticTerm{TermKind::Hopping, a, b, -k.J}, ramp});
    if (k.Delta != 0.0) ts.push_back({QuadraticTerm{TermKind::Pairing, a, b, k.Delta}, ramp});
}

std::vector<int> consecutive(int first, int count) {
    std::vector<int> v(count);
    for (int i = 0; i < count; ++i) v[i] = first + i;
    return v;
}

// Weights of a reduced state on the ground and one-excitation manifolds of
// the subsystem Hamiltonian block. A chain with a near-zero edge mode keeps
// both of its parity sectors in the ground manifold; a closed ring does not.
struct ManifoldWeights {
    double ground = 0.0;
    double single = 0.0;
};

ManifoldWeights manifold_weights(const CanonicalModes& cm, const Eigen::MatrixXd& gamma_sub,
                                 bool degenerate_pair) {
    // Reduced states are generally mixed once the subsystem entangles with
    // the rest of the network. The Pfaffian transition formula still returns
    // tr(rho |m><m|) when the reference state is pure, so the purity guard is
    // disabled here (covariance spectra keep its argument below 1 anyway).
    constexpr double purity_slack = 2.0;
    const auto weight = [&](const std::vector<Eigen::Index>& occupied) {
        Eigen::VectorXd sgn = Eigen::VectorXd::Ones(cm.energies.size());
        for (Eigen::Index nu : occupied) sgn(nu) = -1.0;
        return overlap_sq(gamma_sub, mode_covariance(cm, sgn), purity_slack);
    };
    ManifoldWeights w;
    w.ground = weight({});
    if (degenerate_pair) w.ground += weight({0});
    for (Eigen::Index nu = degenerate_pair ? 1 : 0; nu < cm.energies.size(); ++nu) {
        w.single += weight({nu});
        if (degenerate_pair) w.single += weight({0, nu});
    }
    return w;
}

ChainOutcome classify(const ManifoldWeights& w) {
    if (std::max(w.ground, w.single) < 0.5) return ChainOutcome::Mixed;
    return w.ground >= w.single ? ChainOutcome::Ground : ChainOutcome::SingleExcitation;
}

// Golden-section refinement of a gap minimum: the coarse grid brackets the
// minimum, the local search pins it down (avoided crossings can be much
// narrower than any reasonable grid spacing).
double refine_min(const std::function<double(double)>& f, double lo, double hi, double& arg) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-7) {
        if (f1 < f2) {
            b = x2, x2 = x1, f2 = f1;
            x1 = b - inv_phi * (b - a), f1 = f(x1);
        } else {
            a = x1, x1 = x2, f1 = f2;
            x2 = a + inv_phi * (b - a), f2 = f(x2);
        }
    }
    arg = 0.5 * (a + b);
    return std::min(f1, f2);
}

// Gap between the two lowest levels of even total parity at one instant.
double even_sector_gap(const Protocol& p, double tau) {
    const std::vector<Level> lv = many_body_spectrum(canonical_modes(p.at(0, tau)), 8);
    double e0 = 0.0, e1 = 0.0;
    int found = 0;
    for (const Level& l : lv) {
        if (l.parity != 1) continue;
        if (found == 0) e0 = l.energy;
        else e1 = l.energy;
        if (++found == 2) break;
    }
    if (found < 2)
        throw std::runtime_error(
            "gap_vs_coupling: spectrum window holds fewer than two even-parity levels");
    return e1 - e0;
}

// Minimum over the closing angle of the even-sector gap. This is the gap
// that paces the even mapping channel: the avoided crossing it tracks is
// opened by the external hop, so it closes exactly when that hop vanishes.
double min_even_sector_gap(const MappingSpec& spec, int n_phi) {
    MappingSpec forward = spec;
    forward.inverse = false;
    const Protocol p = build_mapping_protocol(forward);
    double best = std::numeric_limits<double>::infinity();
    int at = 0;
    for (int i = 0; i < n_phi; ++i) {
        const double gap = even_sector_gap(p, double(i) / (n_phi - 1));
        if (gap < best) best = gap, at = i;
    }
    const double lo = double(std::max(at - 1, 0)) / (n_phi - 1);
    const double hi = double(std::min(at + 1, n_phi - 1)) / (n_phi - 1);
    double arg = 0.0;
    return std::min(best, refine_min([&](double t) { return even_sector_gap(p, t); }, lo, hi, arg));
}

}  // namespace

ConditionReport check_conditions(double V, double V_e, double J_tilde, double J) {
    if (J <= 0) throw std::invalid_argument("check_conditions: J must be positive");
    ConditionReport r;
    r.V_tilde = 0.5 * (V + V_e - std::sqrt((V - V_e) * (V - V_e) + 4.0 * J_tilde * J_tilde));
    if (V_e <= 0) {
        // The occupation threshold J_tilde^2 / V_e is undefined; report the
        // parameter set as failing condition 1.
        r.condition1 = false;
        r.boundary = V_e == 0.0;
    } else {
        const double threshold = J_tilde * J_tilde / V_e;
        r.condition1 = V > threshold && threshold > 0.0;
        if (V == threshold || threshold == 0.0) r.boundary = true;
    }
    r.condition2 = V_e > 0.0 && V_e < 2.0 * J;
    if (V_e == 0.0 || V_e == 2.0 * J) r.boundary = true;
    r.predicted = !r.condition1   ? MappingBranch::Violation1
                  : !r.condition2 ? MappingBranch::Violation2
                                  : MappingBranch::Ok;
    return r;
}

Protocol build_mapping_protocol(const MappingSpec& spec) {
    if (spec.length < 2)
        throw std::invalid_argument("build_mapping_protocol: length must be >= 2");
    if (spec.closing_sites != 1 && spec.closing_sites != 2)
        throw std::invalid_argument("build_mapping_protocol: closing_sites must be 1 or 2");
    if (spec.t_f <= 0)
        throw std::invalid_argument("build_mapping_protocol: t_f must be positive");
    const ErrorModel& err = spec.errors;
    if (err.intensity_leak < 0 || err.intensity_leak > 1 || err.mu_disorder < 0)
        throw std::invalid_argument("build_mapping_protocol: error fractions out of range");

    const int N = spec.length;
    const int c_first = N;
    const int c_last = N + spec.closing_sites - 1;
    const int e = spec.external_site();
    // Chemical-potential fluctuations live on the lattice that hosts the
    // chain and its closing sites; the external site is separate hardware.
    const std::vector<double> draws = disorder_draws(c_last + 1, err.mu_disorder, err.seed);

    Protocol p;
    p.n_sites = spec.n_sites();
    p.laser_lag = err.laser_lag;
    p.shape = spec.shape;

    ProtocolStep st{"close the ring", {}, nullptr};
    auto& ts = st.terms;

    // Constant backbone: the open chain, per-site disorder, and the
    // external-site potential.
    for (int i = 0; i + 1 < N; ++i)
        append_link(ts, i, i + 1, KitaevCoupling{spec.J, spec.Delta}, Ramp::Const);
    for (int i = 0; i < N; ++i) {
        const double pot = -spec.mu - draws[i];
        if (pot != 0.0)
            ts.push_back({QuadraticTerm{TermKind::Potential, i, i, pot}, Ramp::Const});
    }
    for (int s = c_first; s <= c_last; ++s)
        if (draws[s] != 0.0)
            ts.push_back({QuadraticTerm{TermKind::Potential, s, s, -draws[s]}, Ramp::Const});
    ts.push_back({QuadraticTerm{TermKind::Potential, e, e, spec.V_e}, Ramp::Const});

    // Switched off: the external hop and the closing-site potentials, the
    // latter leaking a fraction onto their geometric neighbours when the
    // addressing is imperfect.
    ts.push_back({QuadraticTerm{TermKind::Hopping, c_last, e, spec.J_tilde}, Ramp::SwitchOff});
    for (int s = c_first; s <= c_last; ++s) {
        ts.push_back({QuadraticTerm{TermKind::Potential, s, s, spec.V}, Ramp::SwitchOff});
        if (err.intensity_leak > 0.0) {
            // Imperfect focus spills a fraction of each closing-site beam
            // onto its lattice neighbours (the external site sits apart).
            std::vector<int> nbs;
            if (s == c_first) nbs.push_back(N - 1);
            else nbs.push_back(c_first);
            if (s == c_last) nbs.push_back(0);
            else nbs.push_back(c_last);
            for (int nb : nbs)
                ts.push_back({QuadraticTerm{TermKind::Potential, nb, nb,
                                            err.intensity_leak * spec.V},
                              Ramp::SwitchOff});
        }
    }

    // Switched on: the closing links. The last one runs from the final
    // closing site back to site 0; keeping that order fixes its pairing sign.
    append_link(ts, N - 1, c_first, spec.close_in, Ramp::SwitchOn);
    if (spec.closing_sites == 2)
        append_link(ts, c_first, c_last, spec.close_mid, Ramp::SwitchOn);
    append_link(ts, c_last, 0, spec.close_out, Ramp::SwitchOn);

    p.steps.push_back(std::move(st));
    p.validate_continuity();
    return spec.inverse ? time_reversed(p) : p;
}

Eigen::MatrixXd mapping_initial_state(const MappingSpec& spec, int parity) {
    if (parity != 1 && parity != -1)
        throw std::invalid_argument("mapping_initial_state: parity must be +1 or -1");
    const int N = spec.length;
    const std::vector<double> draws =
        disorder_draws(N, spec.errors.mu_disorder, spec.errors.seed);
    QuadraticHamiltonian chain(N);
    for (int i = 0; i + 1 < N; ++i) chain.add_kitaev_link(i, i + 1, spec.J, spec.Delta);
    for (int i = 0; i < N; ++i) chain.add_potential(i, -spec.mu - draws[i]);

    const GaussianState g = ground_state(canonical_modes(chain.to_majorana()), parity);
    const int n = spec.n_sites();
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    gamma.topLeftCorner(2 * N, 2 * N) = g.gamma;
    for (int s = N; s < n; ++s) {
        gamma(majorana_x(s), majorana_y(s)) = 1.0;  // empty site
        gamma(majorana_y(s), majorana_x(s)) = -1.0;
    }
    return gamma;
}

MappingResult run_mapping(const MappingSpec& spec, int chain_parity, const MappingRunOptions& opt) {
    const Protocol p = build_mapping_protocol(spec);
    Eigen::MatrixXd gamma0;
    if (opt.initial_gamma) {
        if (opt.initial_gamma->rows() != 2 * spec.n_sites())
            throw std::invalid_argument("run_mapping: initial covariance has wrong dimension");
        gamma0 = *opt.initial_gamma;
    } else if (spec.inverse) {
        throw std::invalid_argument(
            "run_mapping: inverse runs need an explicit initial covariance");
    } else {
        gamma0 = mapping_initial_state(spec, chain_parity);
    }

    MappingResult res;
    res.gamma0 = gamma0;
    res.parity_initial = parity(gamma0);

    const int e = spec.external_site();
    std::vector<MappingSample>& traj = res.trajectory;
    SampleFn sampler;
    if (opt.evolve.samples_per_step > 0)
        sampler = [&](int, double tau, double t, const Eigen::MatrixXd& g) {
            traj.push_back({tau, t, occupation(g, e), energy_expectation(p.at(0, tau), g)});
        };
    res.gamma = evolve_protocol(p, gamma0, spec.t_f, opt.evolve, sampler);
    res.parity_final = parity(res.gamma);
    res.n_e = occupation(res.gamma, e);

    const MajoranaForm h_final = p.at(0, 1.0);
    const CanonicalModes cm_final = canonical_modes(h_final);
    res.energy_offset = energy_expectation(h_final, res.gamma) - ground_state(cm_final).energy;

    // Classify the persistent subsystem: the closed ring after a forward
    // run, the reopened chain after an inverse one. Both are decoupled from
    // the remaining sites at their protocol's final instant.
    const std::vector<int> sub = spec.inverse
                                     ? consecutive(0, spec.length)
                                     : consecutive(0, spec.length + spec.closing_sites);
    const MajoranaForm h_sub{restrict_sites(h_final.A, sub), 0.0};
    const ManifoldWeights w = manifold_weights(canonical_modes(h_sub),
                                               restrict_sites(res.gamma, sub), spec.inverse);
    res.fidelity_ground = w.ground;
    res.fidelity_single = w.single;
    res.chain = classify(w);
    return res;
}

SpectralFlow spectral_flow(const MappingSpec& spec, int n_phi, int k_levels) {
    if (n_phi < 2) throw std::invalid_argument("spectral_flow: need at least 2 grid points");
    if (k_levels < 4) throw std::invalid_argument("spectral_flow: need at least 4 levels");
    MappingSpec forward = spec;
    forward.inverse = false;
    const Protocol p = build_mapping_protocol(forward);

    const auto gap_23 = [&](double tau) {
        const std::vector<Level> lv = many_body_spectrum(canonical_modes(p.at(0, tau)), k_levels);
        return lv[2].energy - lv[1].energy;
    };

    SpectralFlow flow;
    flow.min_gap_23 = std::numeric_limits<double>::infinity();
    int at = 0;
    for (int i = 0; i < n_phi; ++i) {
        const double tau = double(i) / (n_phi - 1);
        const std::vector<Level> lv = many_body_spectrum(canonical_modes(p.at(0, tau)), k_levels);
        const double gap = lv[2].energy - lv[1].energy;
        if (gap < flow.min_gap_23) {
            flow.min_gap_23 = gap;
            at = i;
        }
        flow.phi.push_back(tau * std::numbers::pi / 2.0);
        flow.levels.push_back(lv);
    }
    double arg = double(at) / (n_phi - 1);
    const double refined = refine_min(gap_23, double(std::max(at - 1, 0)) / (n_phi - 1),
                                      double(std::min(at + 1, n_phi - 1)) / (n_phi - 1), arg);
    if (refined < flow.min_gap_23) {
        flow.min_gap_23 = refined;
        flow.phi_at_min = arg * std::numbers::pi / 2.0;
    } else {
        flow.phi_at_min = double(at) / (n_phi - 1) * std::numbers::pi / 2.0;
    }
    return flow;
}

GapCurve gap_vs_coupling(const MappingSpec& spec, const std::vector<double>& J_tilde_grid,
                         int n_phi) {
    if (J_tilde_grid.empty())
        throw std::invalid_argument("gap_vs_coupling: empty coupling grid");
    if (spec.V_e <= 0)
        throw std::invalid_argument("gap_vs_coupling: V_e must be positive");
    GapCurve curve;
    curve.J_tilde = J_tilde_grid;
    for (double jt : J_tilde_grid) {
        if (jt < 0) throw std::invalid_argument("gap_vs_coupling: couplings must be >= 0");
        MappingSpec injected = spec;
        injected.J_tilde = jt;
        MappingSpec ideal = injected;
        ideal.Delta = ideal.J;
        ideal.mu = 0.0;
        ideal.errors = ErrorModel{};
        curve.gap_ideal.push_back(min_even_sector_gap(ideal, n_phi));
        curve.gap_injected.push_back(min_even_sector_gap(injected, n_phi));
    }
    for (size_t i = 0; i < curve.J_tilde.size(); ++i) {
        if (curve.gap_ideal[i] <= 0) continue;
        const double rel =
            std::abs(curve.gap_injected[i] - curve.gap_ideal[i]) / curve.gap_ideal[i];
        curve.max_rel_diff = std::max(curve.max_rel_diff, rel);
    }
    return curve;
}

double mapping_return_fidelity(const MappingSpec& spec, int parity) {
    MappingSpec forward = spec;
    forward.inverse = false;
    const MappingResult fwd = run_mapping(forward, parity);

    // Re-prepare the stored state as the canonical eigenstate of the manifold
    // the forward run landed in: the external site keeps its sharp occupation
    // and the ring parity follows from total parity conservation. For a
    // degenerate manifold this representative is one arbitrary vector of it.
    const bool e_occupied = fwd.n_e > 0.5;
    const int ring_parity = fwd.parity_final * (e_occupied ? -1 : +1);
    const int n_ring = spec.length + spec.closing_sites;
    const Protocol p = build_mapping_protocol(forward);
    const MajoranaForm h_ring{restrict_sites(p.at(0, 1.0).A, consecutive(0, n_ring)), 0.0};
    const GaussianState ring = ground_state(canonical_modes(h_ring), ring_parity);

    const int n = spec.n_sites();
    Eigen::MatrixXd stored = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    stored.topLeftCorner(2 * n_ring, 2 * n_ring) = ring.gamma;
    for (int s = n_ring; s < n; ++s) {
        const double sign = (s == spec.external_site() && e_occupied) ? -1.0 : 1.0;
        stored(majorana_x(s), majorana_y(s)) = sign;
        stored(majorana_y(s), majorana_x(s)) = -sign;
    }

    MappingSpec back = spec;
    back.inverse = true;
    MappingRunOptions opt;
    opt.initial_gamma = stored;
    const MappingResult inv = run_mapping(back, parity, opt);
    return overlap_sq(inv.gamma, fwd.gamma0);
}

TwoWireReadout map_two_wire_qubit(const MappingSpec& spec, bool logical_one) {
    const int parity_left = logical_one ? -1 : +1;
    const int parity_right = -parity_left;

    const MappingResult fwd_left = run_mapping(spec, parity_left);
    const MappingResult fwd_right = run_mapping(spec, parity_right);

    MappingSpec back = spec;
    back.inverse = true;
    const auto echo = [&](const MappingResult& fwd, int par) {
        MappingRunOptions opt;
        opt.initial_gamma = fwd.gamma;
        const MappingResult inv = run_mapping(back, par, opt);
        return overlap_sq(inv.gamma, fwd.gamma0);
    };

    TwoWireReadout out;
    out.n_e_left = fwd_left.n_e;
    out.n_e_right = fwd_right.n_e;
    out.fidelity_return = echo(fwd_left, parity_left) * echo(fwd_right, parity_right);
    return out;
}

}  // namespace wiresim
