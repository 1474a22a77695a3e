#include "wiresim/bdg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

namespace wiresim {

namespace {

void check_skew(const Eigen::MatrixXd& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() % 2 != 0)
        throw std::invalid_argument(std::string(who) + ": matrix must be square with even dimension");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument(std::string(who) + ": matrix is not antisymmetric");
}

struct ModePair {
    double e;
    Eigen::VectorXd u, w;
};

// Orient (u, w) so that u^T A w = -e with e >= 0.
ModePair orient(const Eigen::MatrixXd& a, Eigen::VectorXd u, Eigen::VectorXd w) {
    double s = u.dot(a * w);
    if (s > 0) {
        std::swap(u, w);
        s = -s;
    }
    return {-s, std::move(u), std::move(w)};
}

std::vector<ModePair> schur_pairs(const Eigen::MatrixXd& a, int depth) {
    const Eigen::Index n = a.rows();
    std::vector<ModePair> pairs;
    pairs.reserve(n / 2);

    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0 || depth > 4) {
        // Numerically zero (or unresolvable) block: any orthonormal pairing
        // splits it into exact zero modes.
        for (Eigen::Index k = 0; k + 1 < n; k += 2)
            pairs.push_back(orient(a, Eigen::MatrixXd::Identity(n, n).col(k),
                                   Eigen::MatrixXd::Identity(n, n).col(k + 1)));
        return pairs;
    }

    Eigen::RealSchur<Eigen::MatrixXd> schur(a);
    Eigen::MatrixXd q, t;
    if (schur.info() == Eigen::Success) {
        q = schur.matrixU();
        t = schur.matrixT();
    } else {
        // The QR iteration can cycle on exactly degenerate skew spectra
        // (e.g. uniform rings). A fixed random rotation of the basis breaks
        // the symmetry that traps it; modes are rotated back afterwards.
        std::mt19937_64 rng(0x5eed5eed);
        std::normal_distribution<double> gauss;
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = gauss(rng);
        const Eigen::MatrixXd r = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
        Eigen::MatrixXd ar = r.transpose() * a * r;
        ar = 0.5 * (ar - ar.transpose().eval());
        schur.compute(ar);
        if (schur.info() != Eigen::Success)
            throw std::runtime_error("canonical_modes: Schur iteration failed to converge");
        q = r * schur.matrixU();
        t = schur.matrixT();
    }

    // 2x2 blocks carry the resolved +-i e pairs; deflated 1x1 blocks hold
    // (near-)zero eigenvalues whose pairing the Schur form leaves open.
    std::vector<Eigen::Index> singles;
    Eigen::Index k = 0;
    while (k < n) {
        if (k + 1 < n && t(k + 1, k) != 0.0) {
            pairs.push_back(orient(a, q.col(k), q.col(k + 1)));
            k += 2;
        } else {
            singles.push_back(k);
            ++k;
        }
    }

    if (!singles.empty()) {
        // Re-resolve the collected near-null space at its own scale so that
        // exponentially small splittings keep absolute accuracy ~eps*||A||.
        const Eigen::Index m = static_cast<Eigen::Index>(singles.size());
        Eigen::MatrixXd u(n, m);
        for (Eigen::Index j = 0; j < m; ++j) u.col(j) = q.col(singles[j]);
        Eigen::MatrixXd s = u.transpose() * a * u;
        s = 0.5 * (s - s.transpose().eval());
        for (const ModePair& p : schur_pairs(s, depth + 1))
            pairs.push_back(orient(a, u * p.u, u * p.w));
    }
    return pairs;
}

struct EnvelopeFit {
    double xi;
    double r2;
};

// Least-squares fit of log(weight) vs distance-from-end, over sites whose
// weight is significant relative to the peak.
EnvelopeFit fit_decay(const Eigen::VectorXd& weight, bool from_left) {
    const Eigen::Index len = weight.size();
    const double peak = weight.maxCoeff();
    std::vector<double> xs, ys;
    for (Eigen::Index s = 0; s < len; ++s) {
        if (weight(s) > peak * 1e-10) {
            xs.push_back(from_left ? double(s + 1) : double(len - s));
            ys.push_back(std::log(weight(s)));
        }
    }
    const auto n = static_cast<double>(xs.size());
    if (n < 2) return {0.0, 1.0};
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) return {0.0, 1.0};
    const double slope = sxy / sxx;
    const double ss_res = syy - slope * sxy;
    const double r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    const double xi = slope < 0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
    return {xi, r2};
}

}  // namespace

Eigen::MatrixXd mode_covariance(const CanonicalModes& cm, const Eigen::VectorXd& block_sign) {
    const Eigen::Index n = cm.modes.rows();
    if (2 * block_sign.size() != n)
        throw std::invalid_argument("mode_covariance: one sign per canonical mode required");
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index nu = 0; nu < block_sign.size(); ++nu) {
        b(2 * nu, 2 * nu + 1) = block_sign(nu);
        b(2 * nu + 1, 2 * nu) = -block_sign(nu);
    }
    return cm.modes * b * cm.modes.transpose();
}

CanonicalModes canonical_modes(const MajoranaForm& f) {
    check_skew(f.A, "canonical_modes");
    std::vector<ModePair> pairs = schur_pairs(f.A, 0);
    std::sort(pairs.begin(), pairs.end(),
              [](const ModePair& a, const ModePair& b) { return a.e < b.e; });

    const Eigen::Index n = f.A.rows();
    CanonicalModes cm;
    cm.offset = f.offset;
    cm.energies.resize(n / 2);
    cm.modes.resize(n, n);
    for (Eigen::Index nu = 0; nu < n / 2; ++nu) {
        cm.energies(nu) = pairs[nu].e;
        cm.modes.col(2 * nu) = pairs[nu].u;
        cm.modes.col(2 * nu + 1) = pairs[nu].w;
    }

    const double scale = std::max(1.0, f.A.norm());
    if ((cm.modes.transpose() * cm.modes - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-9 * n)
        throw std::runtime_error("canonical_modes: mode matrix lost orthogonality");
    Eigen::MatrixXd d = cm.modes.transpose() * f.A * cm.modes;
    for (Eigen::Index nu = 0; nu < n / 2; ++nu) {
        d(2 * nu, 2 * nu + 1) += cm.energies(nu);
        d(2 * nu + 1, 2 * nu) -= cm.energies(nu);
    }
    if (d.norm() > 1e-8 * scale)
        throw std::runtime_error("canonical_modes: block diagonalization residual too large");
    return cm;
}

Eigen::VectorXd quasiparticle_energies(const Eigen::MatrixXd& A) {
    check_skew(A, "quasiparticle_energies");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    const Eigen::VectorXd& sv = svd.singularValues();  // descending, in pairs
    const Eigen::Index m = A.rows() / 2;
    Eigen::VectorXd e(m);
    for (Eigen::Index i = 0; i < m; ++i)
        e(i) = 0.5 * (sv(A.rows() - 1 - 2 * i) + sv(A.rows() - 2 - 2 * i));
    return e;
}

double pfaffian(Eigen::MatrixXd m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("pfaffian: matrix must be square");
    const Eigen::Index n = m.rows();
    if (n % 2 != 0) throw std::invalid_argument("pfaffian: dimension must be even");
    if (n == 0) return 1.0;
    check_skew(m, "pfaffian");

    double pf = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        Eigen::Index p;
        const double mx = m.col(k).segment(k + 1, n - k - 1).cwiseAbs().maxCoeff(&p);
        p += k + 1;
        if (mx == 0.0) return 0.0;
        if (p != k + 1) {
            m.row(p).swap(m.row(k + 1));
            m.col(p).swap(m.col(k + 1));
            pf = -pf;
        }
        const double piv = m(k + 1, k);
        for (Eigen::Index j = k + 2; j < n; ++j) {
            const double f = m(j, k) / piv;
            if (f != 0.0) {
                m.row(j) -= f * m.row(k + 1);
                m.col(j) -= f * m.col(k + 1);
            }
        }
        pf *= m(k, k + 1);
    }
    return pf;
}

GaussianState ground_state(const CanonicalModes& cm, std::optional<int> parity_sector) {
    if (parity_sector && *parity_sector != 1 && *parity_sector != -1)
        throw std::invalid_argument("ground_state: parity sector must be +1 or -1");
    const Eigen::Index nm = cm.energies.size();
    Eigen::VectorXd sgn = Eigen::VectorXd::Ones(nm);
    GaussianState st;
    st.gamma = mode_covariance(cm, sgn);
    st.energy = cm.offset - 0.5 * cm.energies.sum();
    if (parity_sector && parity(st.gamma) != *parity_sector) {
        sgn(0) = -1.0;  // occupy the cheapest quasiparticle
        st.gamma = mode_covariance(cm, sgn);
        st.energy += cm.energies(0);
    }
    return st;
}

int parity(const Eigen::MatrixXd& gamma, double tol) {
    const double pf = pfaffian(gamma);
    if (std::abs(std::abs(pf) - 1.0) > tol)
        throw std::runtime_error("parity: state is not a pure Gaussian state");
    return pf > 0 ? 1 : -1;
}

double parity_expectation(const Eigen::MatrixXd& gamma, const std::vector<int>& sites) {
    return pfaffian(restrict_sites(gamma, sites));
}

Eigen::MatrixXd restrict_sites(const Eigen::MatrixXd& m, const std::vector<int>& sites) {
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * sites.size());
    for (int s : sites) {
        if (s < 0 || 2 * s + 1 >= m.rows())
            throw std::invalid_argument("restrict_sites: site index out of range");
        idx.push_back(majorana_x(s));
        idx.push_back(majorana_y(s));
    }
    Eigen::MatrixXd out(idx.size(), idx.size());
    for (size_t r = 0; r < idx.size(); ++r)
        for (size_t c = 0; c < idx.size(); ++c) out(r, c) = m(idx[r], idx[c]);
    return out;
}

double overlap_sq(const Eigen::MatrixXd& ga, const Eigen::MatrixXd& gb, double purity_tol) {
    if (ga.rows() != gb.rows()) throw std::invalid_argument("overlap_sq: dimension mismatch");
    const Eigen::Index n = ga.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if ((ga * ga + id).cwiseAbs().maxCoeff() > purity_tol ||
        (gb * gb + id).cwiseAbs().maxCoeff() > purity_tol)
        throw std::invalid_argument("overlap_sq: inputs must be pure Gaussian states");
    return std::exp2(-double(n) / 2.0) * std::abs(pfaffian(ga + gb));
}

double energy_expectation(const MajoranaForm& f, const Eigen::MatrixXd& gamma) {
    return f.offset - 0.25 * (f.A * gamma).trace();
}

double occupation(const Eigen::MatrixXd& gamma, int site) {
    return 0.5 * (1.0 - gamma(majorana_x(site), majorana_y(site)));
}

ZeroModeProfile majorana_zero_modes(const MajoranaForm& wire, int length, double tol) {
    if (wire.A.rows() != 2 * length)
        throw std::invalid_argument("majorana_zero_modes: matrix size does not match wire length");
    CanonicalModes cm = canonical_modes(wire);
    if (cm.energies(0) > tol)
        throw std::runtime_error("majorana_zero_modes: lowest mode is not a zero mode");

    const Eigen::VectorXd u = cm.modes.col(0);
    const Eigen::VectorXd w = cm.modes.col(1);
    Eigen::VectorXd pos(2 * length);
    for (int s = 0; s < length; ++s) pos(majorana_x(s)) = pos(majorana_y(s)) = double(s + 1);

    // Rotate the degenerate pair to extremize the mean position: the lower
    // eigenvector sits at the left end, the upper at the right end.
    Eigen::Matrix2d x;
    x(0, 0) = u.dot(pos.asDiagonal() * u);
    x(0, 1) = x(1, 0) = u.dot(pos.asDiagonal() * w);
    x(1, 1) = w.dot(pos.asDiagonal() * w);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(x);

    ZeroModeProfile zm;
    zm.energy = cm.energies(0);
    zm.left = es.eigenvectors()(0, 0) * u + es.eigenvectors()(1, 0) * w;
    zm.right = es.eigenvectors()(0, 1) * u + es.eigenvectors()(1, 1) * w;

    Eigen::VectorXd wl(length), wr(length);
    for (int s = 0; s < length; ++s) {
        wl(s) = std::hypot(zm.left(majorana_x(s)), zm.left(majorana_y(s)));
        wr(s) = std::hypot(zm.right(majorana_x(s)), zm.right(majorana_y(s)));
    }
    const EnvelopeFit fl = fit_decay(wl, true);
    const EnvelopeFit fr = fit_decay(wr, false);
    zm.xi_left = fl.xi;
    zm.r2_left = fl.r2;
    zm.xi_right = fr.xi;
    zm.r2_right = fr.r2;
    return zm;
}

std::vector<Level> many_body_spectrum(const CanonicalModes& cm, int k) {
    if (k < 1) throw std::invalid_argument("many_body_spectrum: k must be positive");
    const Eigen::Index m = cm.energies.size();
    const double e_vac = cm.offset - 0.5 * cm.energies.sum();
    const int p_vac = parity(mode_covariance(cm, Eigen::VectorXd::Ones(m)));

    std::uint64_t total = (m < 62) ? (std::uint64_t{1} << m) : std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t want = std::min<std::uint64_t>(static_cast<std::uint64_t>(k), total);

    // Best-first enumeration of occupation subsets by their maximal element:
    // children of a subset are "extend by next mode" and "shift max to next".
    struct Node {
        double energy;
        Eigen::Index last;
        int count;
        bool operator>(const Node& o) const { return energy > o.energy; }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
    std::vector<Level> out;
    out.push_back({e_vac, p_vac});
    if (m > 0) heap.push({e_vac + cm.energies(0), 0, 1});
    while (out.size() < want && !heap.empty()) {
        Node nd = heap.top();
        heap.pop();
        out.push_back({nd.energy, nd.count % 2 == 0 ? p_vac : -p_vac});
        if (nd.last + 1 < m) {
            heap.push({nd.energy + cm.energies(nd.last + 1), nd.last + 1, nd.count + 1});
            heap.push({nd.energy - cm.energies(nd.last) + cm.energies(nd.last + 1), nd.last + 1,
                       nd.count});
        }
    }
    return out;
}

}  // namespace wiresim
