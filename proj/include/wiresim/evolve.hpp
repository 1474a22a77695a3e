#pragma once

#include "wiresim/lattice.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

// Piecewise protocols of quadratic Hamiltonians with smooth switch ramps,
// and the Gaussian time evolution Gamma(t) = W(t) Gamma(0) W(t)^T driven by
// dW/dt = A(t) W.
namespace wiresim {

// Weight of a term over one protocol step, tau in [0, 1]:
//   Const:     1
//   SwitchOff: cos(pi tau'/2)   tau' = min(1, tau/(1-lag))
//   SwitchOn:  sin(pi tau'/2)   tau' = max(0, (tau-lag)/(1-lag))
// `lag` in [0, 1) models imperfect synchronization between the switch-off
// and switch-on control channels; step endpoints are always exact.
enum class Ramp { Const, SwitchOff, SwitchOn };

// Ramp shapes: Trig drives the switch angle linearly in tau; Smooth drives it
// through the cubic smoothstep 3tau^2 - 2tau^3, giving zero-slope endpoints.
// Both keep cos^2 + sin^2 = 1 between paired off/on ramps.
enum class RampShape { Trig, Smooth };

// When `phase_table` is given it overrides the shape: the switch angle is
// read off the table (uniform grid over [0, 1], endpoints 0 and pi/2) at the
// smoothstep-windowed progress. Off/on ramps then run as cos/sin of that
// angle. Tables are produced by paced_phase_table below.
double ramp_weight(Ramp r, double tau, double lag = 0.0, RampShape shape = RampShape::Trig,
                   const std::vector<double>* phase_table = nullptr);

// Tabulates a monotone angle schedule phi(s), s in [0, 1], whose sweep rate
// is proportional to gap_of_phase(phi)^2 — the local-adiabatic pacing that
// spends time where the protecting gap is small. The supplied gap must be
// strictly positive on [0, pi/2].
std::vector<double> paced_phase_table(const std::function<double(double)>& gap_of_phase,
                                      int n = 257);

struct ScheduledTerm {
    QuadraticTerm term;
    Ramp ramp = Ramp::Const;
};

struct ProtocolStep {
    std::string label;
    std::vector<ScheduledTerm> terms;
    // Optional analytic estimate of the protecting gap as a function of tau,
    // recorded alongside trajectories; the spectral gap is always available
    // from the instantaneous Hamiltonian.
    std::function<double(double)> gap_estimate;
    // Optional paced angle schedule for this step's off/on ramps; empty
    // means the protocol-wide shape applies. See ramp_weight.
    std::vector<double> phase_table;
};

struct Protocol {
    int n_sites = 0;
    std::vector<ProtocolStep> steps;
    double laser_lag = 0.0;
    RampShape shape = RampShape::Trig;

    // Instantaneous Hamiltonian as a term list / Majorana form.
    QuadraticHamiltonian hamiltonian_at(int step, double tau) const;
    MajoranaForm at(int step, double tau) const;

    // Throws std::logic_error naming the offending steps if the assembled
    // Hamiltonian jumps between consecutive step boundaries.
    void validate_continuity(double tol = 1e-9) const;
};

// Exact time reverse: steps in reverse order, off/on ramps exchanged, and
// paced angle tables complemented, so that H_rev(step s, tau) equals
// H(n-1-s, 1-tau) for every shape, lag, and pacing table.
Protocol time_reversed(const Protocol& p);

struct EvolveOptions {
    double dt = 0.01;        // integrator substep (time units of 1/J)
    int renorm_every = 500;  // purity restoration cadence, in substeps
    int samples_per_step = 0;
};

// Called at sample boundaries: step index, tau within the step, absolute
// time, current covariance. tau = 0 is reported for the first step only.
using SampleFn = std::function<void(int step, double tau, double t, const Eigen::MatrixXd& gamma)>;

// Midpoint Cayley integrator: per substep O = (1 - h A/2)^-1 (1 + h A/2),
// Gamma <- O Gamma O^T. O is exactly orthogonal for antisymmetric A, so
// purity is preserved up to roundoff; second-order accurate in h.
Eigen::MatrixXd evolve_protocol(const Protocol& p, Eigen::MatrixXd gamma, double t_step,
                                const EvolveOptions& opt = {}, const SampleFn& sample = nullptr);

// <(i/2)[g_a, g_b]> for Majorana directions g_a = sum_k va_k c_k.
inline double correlation(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& va,
                          const Eigen::VectorXd& vb) {
    return va.dot(gamma * vb);
}

}  // namespace wiresim
