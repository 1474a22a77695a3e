#include "wiresim/evolve.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wiresim {

namespace {

constexpr double half_pi = std::numbers::pi / 2.0;

void check_lag(double lag) {
    if (lag < 0.0 || lag >= 1.0)
        throw std::invalid_argument("ramp_weight: lag must lie in [0, 1)");
}

// Project Gamma back onto the pure-state manifold (orthogonal antisymmetric
// matrices): polar factor, then antisymmetrization.
void purify(Eigen::MatrixXd& gamma) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(gamma, Eigen::ComputeThinU | Eigen::ComputeThinV);
    gamma = svd.matrixU() * svd.matrixV().transpose();
    gamma = 0.5 * (gamma - gamma.transpose().eval());
}

}  // namespace

double ramp_weight(Ramp r, double tau, double lag, RampShape shape,
                   const std::vector<double>* phase_table) {
    check_lag(lag);
    if (tau < -1e-12 || tau > 1.0 + 1e-12)
        throw std::invalid_argument("ramp_weight: tau must lie in [0, 1]");
    const auto angle = [shape, phase_table](double x) {
        if (phase_table && phase_table->size() >= 2) {
            // Paced schedule: smoothstep window, then the tabulated angle.
            const double s = x * x * (3.0 - 2.0 * x);
            const auto& tab = *phase_table;
            const double pos = s * double(tab.size() - 1);
            const auto i = std::min(size_t(pos), tab.size() - 2);
            return tab[i] + (pos - double(i)) * (tab[i + 1] - tab[i]);
        }
        if (shape == RampShape::Smooth) x = x * x * (3.0 - 2.0 * x);
        return half_pi * x;
    };
    switch (r) {
        case Ramp::Const:
            return 1.0;
        case Ramp::SwitchOff:
            return std::cos(angle(std::min(1.0, tau / (1.0 - lag))));
        case Ramp::SwitchOn:
            return std::sin(angle(std::max(0.0, (tau - lag) / (1.0 - lag))));
    }
    return 0.0;
}

std::vector<double> paced_phase_table(const std::function<double(double)>& gap_of_phase, int n) {
    if (!gap_of_phase) throw std::invalid_argument("paced_phase_table: gap function required");
    if (n < 2) throw std::invalid_argument("paced_phase_table: need at least 2 samples");
    constexpr int fine = 2048;
    std::vector<double> phi(fine + 1), s(fine + 1);
    s[0] = 0.0;
    double prev = 0.0;
    for (int i = 0; i <= fine; ++i) {
        phi[i] = half_pi * double(i) / fine;
        const double g = gap_of_phase(phi[i]);
        if (!(g > 0.0))
            throw std::invalid_argument("paced_phase_table: gap must stay positive");
        const double w = 1.0 / (g * g);
        if (i > 0) s[i] = s[i - 1] + 0.5 * (w + prev);
        prev = w;
    }
    for (double& v : s) v /= s[fine];
    // Invert s(phi) onto a uniform progress grid.
    std::vector<double> table(n);
    int seg = 0;
    for (int j = 0; j < n; ++j) {
        const double target = double(j) / (n - 1);
        while (seg + 1 < fine && s[seg + 1] < target) ++seg;
        const double ds = s[seg + 1] - s[seg];
        const double f = ds > 0.0 ? (target - s[seg]) / ds : 0.0;
        table[j] = phi[seg] + f * (phi[seg + 1] - phi[seg]);
    }
    table.front() = 0.0;
    table.back() = half_pi;
    return table;
}

QuadraticHamiltonian Protocol::hamiltonian_at(int step, double tau) const {
    if (step < 0 || step >= int(steps.size()))
        throw std::invalid_argument("Protocol: step index out of range");
    QuadraticHamiltonian h(n_sites);
    const std::vector<double>* table =
        steps[step].phase_table.empty() ? nullptr : &steps[step].phase_table;
    for (const ScheduledTerm& st : steps[step].terms) {
        const double w = ramp_weight(st.ramp, tau, laser_lag, shape, table);
        if (w == 0.0) continue;
        QuadraticTerm t = st.term;
        t.amp *= w;
        h.terms.push_back(t);
    }
    return h;
}

MajoranaForm Protocol::at(int step, double tau) const { return hamiltonian_at(step, tau).to_majorana(); }

void Protocol::validate_continuity(double tol) const {
    for (size_t s = 0; s + 1 < steps.size(); ++s) {
        const Eigen::MatrixXd end = at(int(s), 1.0).A;
        const Eigen::MatrixXd begin = at(int(s) + 1, 0.0).A;
        if ((end - begin).cwiseAbs().maxCoeff() > tol)
            throw std::logic_error("Protocol: Hamiltonian jumps between step '" + steps[s].label +
                                   "' and step '" + steps[s + 1].label + "'");
    }
}

Protocol time_reversed(const Protocol& p) {
    Protocol r;
    r.n_sites = p.n_sites;
    r.laser_lag = p.laser_lag;
    r.shape = p.shape;
    for (auto it = p.steps.rbegin(); it != p.steps.rend(); ++it) {
        ProtocolStep st;
        st.label = it->label + " reversed";
        st.terms = it->terms;
        for (ScheduledTerm& t : st.terms) {
            if (t.ramp == Ramp::SwitchOff)
                t.ramp = Ramp::SwitchOn;
            else if (t.ramp == Ramp::SwitchOn)
                t.ramp = Ramp::SwitchOff;
        }
        if (it->gap_estimate)
            st.gap_estimate = [g = it->gap_estimate](double tau) { return g(1.0 - tau); };
        if (!it->phase_table.empty()) {
            st.phase_table.resize(it->phase_table.size());
            for (size_t j = 0; j < st.phase_table.size(); ++j)
                st.phase_table[j] =
                    half_pi - it->phase_table[it->phase_table.size() - 1 - j];
        }
        r.steps.push_back(std::move(st));
    }
    return r;
}

Eigen::MatrixXd evolve_protocol(const Protocol& p, Eigen::MatrixXd gamma, double t_step,
                                const EvolveOptions& opt, const SampleFn& sample) {
    if (opt.dt <= 0.0) throw std::invalid_argument("evolve_protocol: dt must be positive");
    if (t_step <= 0.0) throw std::invalid_argument("evolve_protocol: t_step must be positive");
    const Eigen::Index n = gamma.rows();
    if (gamma.cols() != n || n != 2 * p.n_sites)
        throw std::invalid_argument("evolve_protocol: covariance size does not match protocol");

    const int segments = std::max(1, opt.samples_per_step);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    long steps_since_renorm = 0;

    if (sample && opt.samples_per_step > 0) sample(0, 0.0, 0.0, gamma);
    for (int s = 0; s < int(p.steps.size()); ++s) {
        for (int seg = 0; seg < segments; ++seg) {
            const double tau0 = double(seg) / segments;
            const double tau1 = double(seg + 1) / segments;
            const double span = (tau1 - tau0) * t_step;
            const int nsub = std::max(1, int(std::ceil(span / opt.dt - 1e-12)));
            const double h = span / nsub;
            for (int k = 0; k < nsub; ++k) {
                const double tau_mid = tau0 + (k + 0.5) * (tau1 - tau0) / nsub;
                const Eigen::MatrixXd a = p.at(s, tau_mid).A;
                Eigen::PartialPivLU<Eigen::MatrixXd> lu(id - (0.5 * h) * a);
                const Eigen::MatrixXd o = lu.solve(id + (0.5 * h) * a);
                gamma = o * gamma * o.transpose();
                if (++steps_since_renorm >= opt.renorm_every) {
                    purify(gamma);
                    steps_since_renorm = 0;
                }
            }
            if (sample && opt.samples_per_step > 0)
                sample(s, tau1, (s + tau1) * t_step, gamma);
        }
    }
    purify(gamma);
    return gamma;
}

}  // namespace wiresim
