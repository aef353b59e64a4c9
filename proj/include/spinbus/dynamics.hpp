#ifndef SPINBUS_DYNAMICS_HPP
#define SPINBUS_DYNAMICS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spinbus/correlation.hpp" // TimeGrid
#include "spinbus/coupling.hpp"

namespace spinbus {

/// Two-qubit density matrix in the ordered basis |ee>, |eg>, |ge>, |gg>.
/// Hermitian, unit trace, positive semidefinite (validated on construction
/// with tolerances 1e-10).
class TwoQubitDensity {
public:
    static TwoQubitDensity from_matrix(const Eigen::Matrix4cd& m) {
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("TwoQubitDensity: not Hermitian");
        if (std::abs(m.trace() - Complex(1.0, 0.0)) > 1e-10)
            throw std::invalid_argument("TwoQubitDensity: trace != 1");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("TwoQubitDensity: negative eigenvalue");
        TwoQubitDensity rho;
        rho.m_ = m;
        return rho;
    }

    static TwoQubitDensity pure(const Eigen::Vector4cd& ket) {
        const double norm = ket.norm();
        if (norm < 1e-300) throw std::invalid_argument("TwoQubitDensity: zero ket");
        const Eigen::Vector4cd psi = ket / norm;
        TwoQubitDensity rho;
        rho.m_ = psi * psi.adjoint();
        return rho;
    }

    /// |eg>: spin A excited, spin B ground (basis index 1).
    static TwoQubitDensity basis_state(int index) {
        if (index < 0 || index > 3) throw std::invalid_argument("basis_state: index in 0..3");
        Eigen::Vector4cd ket = Eigen::Vector4cd::Zero();
        ket(index) = Complex(1.0, 0.0);
        return pure(ket);
    }

    const Eigen::Matrix4cd& matrix() const { return m_; }

private:
    TwoQubitDensity() = default;
    Eigen::Matrix4cd m_ = Eigen::Matrix4cd::Zero();
};

namespace detail {

/// Hermitian square root with eigenvalue clamping at zero.
inline Eigen::Matrix4cd hermitian_sqrt(const Eigen::Matrix4cd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// rho(t) = U rho U+ with U = exp(-i H t), via eigendecomposition of H.
inline TwoQubitDensity evolve(const TwoQubitDensity& rho0, const TwoQubitHamiltonian& h,
                              double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h.matrix);
    Eigen::Vector4cd phases;
    for (int i = 0; i < 4; ++i) phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * t));
    const Eigen::Matrix4cd u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::Matrix4cd out = u * rho0.matrix() * u.adjoint();
    // evolution is exactly unitary up to roundoff; re-symmetrize the tail
    out = (out + out.adjoint().eval()) / 2.0;
    return TwoQubitDensity::from_matrix(out);
}

/// Wootters concurrence C = max{0, l1 - l2 - l3 - l4} where l_i are the
/// square roots of the eigenvalues of rho rho~, rho~ = (sy x sy) rho* (sy x sy).
/// Computed on the Hermitian equivalent sqrt(rho) rho~ sqrt(rho) (same
/// nonzero spectrum), with tiny negative eigenvalues clamped to zero.
inline double concurrence(const TwoQubitDensity& rho) {
    static const Eigen::Matrix4cd spin_flip = [] {
        Eigen::Matrix4cd f = Eigen::Matrix4cd::Zero();
        // (sigma^y x sigma^y) in the |ee>,|eg>,|ge>,|gg> basis
        f(0, 3) = Complex(-1.0, 0.0);
        f(1, 2) = Complex(1.0, 0.0);
        f(2, 1) = Complex(1.0, 0.0);
        f(3, 0) = Complex(-1.0, 0.0);
        return f;
    }();
    const Eigen::Matrix4cd rho_tilde = spin_flip * rho.matrix().conjugate() * spin_flip;
    const Eigen::Matrix4cd sqrt_rho = detail::hermitian_sqrt(rho.matrix());
    Eigen::Matrix4cd herm = sqrt_rho * rho_tilde * sqrt_rho;
    herm = (herm + herm.adjoint().eval()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(herm, Eigen::EigenvaluesOnly);
    // roundoff-sized eigenvalues must be zeroed before the square root, which
    // would otherwise blow 1e-16 noise up to 1e-8
    Eigen::Vector4d ev = es.eigenvalues();
    const double floor_at = 1e-13 * std::max(ev.maxCoeff(), 0.0);
    Eigen::Vector4d lam;
    for (int i = 0; i < 4; ++i) lam(i) = ev(i) > floor_at ? std::sqrt(ev(i)) : 0.0;
    std::sort(lam.data(), lam.data() + 4, std::greater<double>());
    return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

/// Uhlmann fidelity F(rho0, rho1) = tr sqrt(sqrt(rho1) rho0 sqrt(rho1)).
inline double fidelity(const TwoQubitDensity& rho0, const TwoQubitDensity& rho1) {
    const Eigen::Matrix4cd s1 = detail::hermitian_sqrt(rho1.matrix());
    Eigen::Matrix4cd inner = s1 * rho0.matrix() * s1;
    inner = (inner + inner.adjoint().eval()) / 2.0;
    const double f = detail::hermitian_sqrt(inner).trace().real();
    return std::clamp(f, 0.0, 1.0 + 1e-9);
}

/// Concurrence of exp(-i H_eff t) rho0 exp(+i H_eff t) on each grid point.
inline std::vector<double> concurrence_trajectory(const EffectiveCouplings& c,
                                                  const TwoQubitDensity& rho0,
                                                  const TimeGrid& grid) {
    grid.validate();
    const TwoQubitHamiltonian h = build_heff(c);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h.matrix);
    std::vector<double> out(static_cast<std::size_t>(grid.count));
    for (int i = 0; i < grid.count; ++i) {
        Eigen::Vector4cd phases;
        for (int q = 0; q < 4; ++q)
            phases(q) = std::exp(Complex(0.0, -es.eigenvalues()(q) * grid.t(i)));
        const Eigen::Matrix4cd u =
            es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        Eigen::Matrix4cd m = u * rho0.matrix() * u.adjoint();
        m = (m + m.adjoint().eval()) / 2.0;
        out[static_cast<std::size_t>(i)] = concurrence(TwoQubitDensity::from_matrix(m));
    }
    return out;
}

/// Earliest grid time where the series reaches threshold * (series max).
/// Returns +infinity when the series never rises meaningfully above zero
/// (e.g. all couplings zero).
inline double time_to_first_max(const std::vector<double>& series, const TimeGrid& grid,
                                double threshold = 0.99) {
    if (series.size() != static_cast<std::size_t>(grid.count))
        throw std::invalid_argument("time_to_first_max: series/grid size mismatch");
    const double peak = *std::max_element(series.begin(), series.end());
    if (peak < 1e-12) return std::numeric_limits<double>::infinity();
    const double bar = threshold * peak;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (series[i] >= bar) return grid.t(static_cast<int>(i));
    return std::numeric_limits<double>::infinity();
}

} // namespace spinbus

#endif // SPINBUS_DYNAMICS_HPP
