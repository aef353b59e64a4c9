#ifndef SPINBUS_DSF_HPP
#define SPINBUS_DSF_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbus/correlation.hpp"

namespace spinbus {

/// Parameters of the damped half-line Fourier transform.  epsilon replaces
/// the 0+ convergence factor of the transform e^{(i omega - 0+) t}.
struct TransformConfig {
    double epsilon = 0.15; // broadening, energy units
    double t_max = 40.0;
    double dt = 0.05;
    int n_max = -1;         // max separation in the spatial sum; -1 = all (N-1)
    bool include_n0 = true; // keep the n = 0 autocorrelation term

    TimeGrid grid() const {
        return TimeGrid{dt, static_cast<int>(std::lround(t_max / dt)) + 1};
    }

    void validate(double band_top_energy) const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("TransformConfig: epsilon must be > 0");
        if (!(t_max > 0.0) || !(dt > 0.0))
            throw std::invalid_argument("TransformConfig: t_max and dt must be > 0");
        if (epsilon * t_max < 5.0)
            throw std::invalid_argument(
                "TransformConfig: epsilon * t_max = " + std::to_string(epsilon * t_max) +
                " < 5; the damped tail is not suppressed");
        if (band_top_energy > 0.0 && !(dt < std::numbers::pi / (2.0 * band_top_energy)))
            throw std::invalid_argument(
                "TransformConfig: dt = " + std::to_string(dt) +
                " cannot resolve phases up to the band top " + std::to_string(band_top_energy));
    }
};

struct DsfValue {
    double k = 0.0;
    double omega = 0.0;
    Complex value{0.0, 0.0};
};

/// Trapezoidal quadrature of int_0^{t_max} C(t) e^{(i omega - epsilon) t} dt
/// over the series' uniform grid.
inline Complex half_line_fourier(const std::vector<Complex>& values, const TimeGrid& grid,
                                 double omega, double epsilon) {
    if (values.size() != static_cast<std::size_t>(grid.count))
        throw std::invalid_argument("half_line_fourier: series/grid size mismatch");
    if (values.size() < 2) throw std::invalid_argument("half_line_fourier: series too short");
    Complex acc(0.0, 0.0);
    const int m = grid.count;
    for (int i = 0; i < m; ++i) {
        const double t = grid.t(i);
        const Complex w = std::exp(Complex(-epsilon * t, omega * t));
        const double trap = (i == 0 || i == m - 1) ? 0.5 : 1.0;
        acc += trap * values[static_cast<std::size_t>(i)] * w;
    }
    return acc * grid.dt;
}

inline Complex half_line_fourier(const CorrelationSeries& series, double omega, double epsilon) {
    return half_line_fourier(series.values, series.grid, omega, epsilon);
}

/// S^{alpha beta}(k, omega) = sum_n e^{i k n} int_0^inf C_n(t) e^{(i omega - eps) t} dt
/// with n running over -n_max .. n_max.  The +-n series coincide (see
/// CorrelationSet::series), so the sum is T[C_0] + 2 sum_{n>=1} cos(kn) T[C_n].
inline DsfValue dsf(Channel channel, double k, double omega, const CorrelationSet& correlations,
                    const TransformConfig& config) {
    int n_max = config.n_max;
    const int n_sites = correlations.chain().n_sites;
    if (n_max < 0 || n_max > n_sites - 1) n_max = n_sites - 1;

    Complex acc(0.0, 0.0);
    if (config.include_n0)
        acc += half_line_fourier(correlations.series(channel, 0), omega, config.epsilon);
    for (int n = 1; n <= n_max; ++n) {
        const Complex t = half_line_fourier(correlations.series(channel, n), omega,
                                            config.epsilon);
        acc += 2.0 * std::cos(k * n) * t;
    }
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw std::runtime_error("dsf: non-finite value at omega=" + std::to_string(omega));
    return DsfValue{k, omega, acc};
}

} // namespace spinbus

#endif // SPINBUS_DSF_HPP
