#ifndef SPINBUS_CHAIN_HPP
#define SPINBUS_CHAIN_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinbus {

enum class Boundary { Periodic, Open };

inline const char* to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "open"; }

/// Physical parameters of the transverse-field Ising chain.  The field is
/// written Gamma for the periodic convention and plays the role of Omega in
/// the open-chain Hamiltonian; lambda = J / Gamma throughout.
struct ChainSpec {
    int n_sites = 2;
    double field = 1.0;    // Gamma (= Omega), energy units
    double coupling = 0.0; // J >= 0, energy units
    Boundary boundary = Boundary::Open;

    double lambda() const { return coupling / field; }

    void validate() const {
        if (n_sites < 2) throw std::invalid_argument("ChainSpec: n_sites must be >= 2");
        if (!(field > 0.0)) throw std::invalid_argument("ChainSpec: field must be > 0");
        if (coupling < 0.0) throw std::invalid_argument("ChainSpec: coupling must be >= 0");
        if (!std::isfinite(lambda())) throw std::invalid_argument("ChainSpec: lambda not finite");
    }
};

/// Quasiparticle energies and the Bogoliubov row vectors Phi_k, Psi_k.
/// Energies are stored in absolute units: 2*Gamma*Lambda_k for the periodic
/// analytic case, and the singular values of (A+B) for the open chain (whose
/// A already carries the 2*Omega scale).  Both Phi*Phi^T and Psi*Psi^T are
/// identity to 1e-10.
struct SpectralSolution {
    Boundary boundary = Boundary::Open;
    Eigen::VectorXd energies; // N entries, >= 0
    Eigen::MatrixXd phi;      // N x N, row k = Phi_k
    Eigen::MatrixXd psi;      // N x N, row k = Psi_k
};

namespace detail {

// Fixes the sign gauge of a (Phi, Psi) row pair: the largest-|.| entry of the
// Phi row is made positive.  Contractions only involve products of two rows of
// the same mode, so flipping both rows together is physically inert.
inline void canonicalize_mode_signs(Eigen::MatrixXd& phi, Eigen::MatrixXd& psi) {
    for (Eigen::Index p = 0; p < phi.rows(); ++p) {
        Eigen::Index imax = 0;
        phi.row(p).cwiseAbs().maxCoeff(&imax);
        if (phi(p, imax) < 0.0) {
            phi.row(p) *= -1.0;
            psi.row(p) *= -1.0;
        }
    }
}

} // namespace detail

/// Analytic spectrum of the periodic chain.
///
/// k = 2*pi*m/N with m = -N/2 .. N/2-1 (even N) or -(N-1)/2 .. (N-1)/2 (odd N),
/// rows ordered by ascending m.  Lambda_k = sqrt(1 + lambda^2 + 2 lambda cos k),
/// energies 2*Gamma*Lambda_k.  Phi rows are the normalized sine (k > 0) and
/// cosine (k <= 0) vectors; Psi_k = -[(1 + lambda cos k) Phi_k +
/// lambda sin k Phi_{-k}] / Lambda_k.  At lambda = 1 the m = -N/2 zero mode is
/// assigned Psi = +Phi (the lambda -> 1+ limit of the generic formula); the
/// sign is a gauge of the Bogoliubov mode and cancels in correlation functions.
inline SpectralSolution periodic_spectrum(const ChainSpec& spec) {
    spec.validate();
    if (spec.boundary != Boundary::Periodic)
        throw std::invalid_argument("periodic_spectrum: spec.boundary must be Periodic");

    const int n = spec.n_sites;
    const double lambda = spec.lambda();
    const int m_min = (n % 2 == 0) ? -n / 2 : -(n - 1) / 2;

    SpectralSolution sol;
    sol.boundary = Boundary::Periodic;
    sol.energies.resize(n);
    sol.phi.resize(n, n);
    sol.psi.resize(n, n);

    auto row_of_m = [&](int m) { return m - m_min; };

    // Phi rows first; Psi needs Phi_{-k}.
    for (int m = m_min; m < m_min + n; ++m) {
        const double k = 2.0 * std::numbers::pi * m / n;
        const int r = row_of_m(m);
        for (int j = 1; j <= n; ++j)
            sol.phi(r, j - 1) = (m > 0) ? std::sin(k * j) : std::cos(k * j);
        const double norm = sol.phi.row(r).norm();
        sol.phi.row(r) /= norm;
    }

    for (int m = m_min; m < m_min + n; ++m) {
        const double k = 2.0 * std::numbers::pi * m / n;
        const int r = row_of_m(m);
        const double lam_k = std::sqrt(1.0 + lambda * lambda + 2.0 * lambda * std::cos(k));
        sol.energies(r) = 2.0 * spec.field * lam_k;

        if (lam_k < 1e-12) {
            // critical zero mode (lambda = 1, k = -pi): Psi = +Phi by convention
            sol.psi.row(r) = sol.phi.row(r);
            continue;
        }
        const double a = 1.0 + lambda * std::cos(k);
        const double b = lambda * std::sin(k);
        if (std::abs(b) < 1e-15 || -m == m || -m < m_min || -m >= m_min + n) {
            sol.psi.row(r) = -(a / lam_k) * sol.phi.row(r);
        } else {
            sol.psi.row(r) = -(a * sol.phi.row(r) + b * sol.phi.row(row_of_m(-m))) / lam_k;
        }
    }
    return sol;
}

/// Numeric spectrum of the open chain via the SVD of (A + B) with
/// A = 2*Omega*I + J*(super + sub diagonal), B = J*(super - sub diagonal).
/// (A - B)(A + B) = (A + B)^T (A + B), so the singular values of (A + B) are
/// the energies Lambda_p, the right singular vectors give Phi and the left
/// ones give Psi = Phi (A - B) / Lambda, including an orthonormal null-space
/// completion when Lambda = 0.  Rows are ordered by ascending energy.
inline SpectralSolution open_spectrum(const ChainSpec& spec) {
    spec.validate();
    if (spec.boundary != Boundary::Open)
        throw std::invalid_argument("open_spectrum: spec.boundary must be Open");

    const int n = spec.n_sites;
    const double om = spec.field;
    const double j = spec.coupling;

    Eigen::MatrixXd apb = Eigen::MatrixXd::Zero(n, n); // A + B
    for (int i = 0; i < n; ++i) {
        apb(i, i) = 2.0 * om;
        if (i + 1 < n) apb(i, i + 1) = 2.0 * j; // A and B both put +J on the superdiagonal
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(apb, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success)
        throw std::runtime_error("open_spectrum: SVD failed to converge (lambda=" +
                                 std::to_string(spec.lambda()) + ", N=" + std::to_string(n) + ")");

    SpectralSolution sol;
    sol.boundary = Boundary::Open;
    sol.energies.resize(n);
    sol.phi.resize(n, n);
    sol.psi.resize(n, n);
    // JacobiSVD sorts singular values descending; store ascending, keeping the
    // SVD column order within degenerate blocks (stable, reproducible).
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) order[static_cast<std::size_t>(p)] = p;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return svd.singularValues()(a) < svd.singularValues()(b);
    });
    for (int p = 0; p < n; ++p) {
        const int src = order[static_cast<std::size_t>(p)];
        sol.energies(p) = svd.singularValues()(src);
        sol.phi.row(p) = svd.matrixV().col(src).transpose();
        sol.psi.row(p) = svd.matrixU().col(src).transpose();
    }
    detail::canonicalize_mode_signs(sol.phi, sol.psi);
    return sol;
}

inline SpectralSolution spectrum(const ChainSpec& spec) {
    return spec.boundary == Boundary::Periodic ? periodic_spectrum(spec) : open_spectrum(spec);
}

/// Smallest quasiparticle energy; the probe of criticality.
inline double energy_gap(const SpectralSolution& sol) {
    if (sol.energies.size() == 0) throw std::invalid_argument("energy_gap: empty solution");
    return sol.energies.minCoeff();
}

/// Largest quasiparticle energy (sets the time-grid resolution requirement).
inline double band_top(const SpectralSolution& sol) {
    if (sol.energies.size() == 0) throw std::invalid_argument("band_top: empty solution");
    return sol.energies.maxCoeff();
}

} // namespace spinbus

#endif // SPINBUS_CHAIN_HPP
