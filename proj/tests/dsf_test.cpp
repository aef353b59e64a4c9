#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "spinbus/dsf.hpp"
#include "spinbus/exact.hpp"

using namespace spinbus;

namespace {

CorrelationSeries constant_series(Complex value, const TimeGrid& grid) {
    CorrelationSeries s{Channel::XX, 0, 1, grid, {}};
    s.values.assign(static_cast<std::size_t>(grid.count), value);
    return s;
}

} // namespace

TEST_CASE("transform of the zero series is zero") {
    const TimeGrid grid{0.05, 201};
    const CorrelationSeries s = constant_series(Complex(0.0, 0.0), grid);
    CHECK(half_line_fourier(s, 1.3, 0.2) == Complex(0.0, 0.0));
}

TEST_CASE("transform of the J = 0 autocorrelation has the closed form") {
    const double om_chain = 1.0;
    const double eps = 0.25;
    const TimeGrid grid{0.01, 4801}; // t_max = 48, eps * t_max = 12
    CorrelationSeries s{Channel::XX, 0, 1, grid, {}};
    for (int i = 0; i < grid.count; ++i)
        s.values.push_back(std::exp(Complex(0.0, -2.0 * om_chain * grid.t(i))));
    for (double omega : {-1.0, 0.3, 1.7, 3.0}) {
        const Complex got = half_line_fourier(s, omega, eps);
        const Complex expected = Complex(0.0, 1.0) / Complex(omega - 2.0 * om_chain, eps);
        CHECK(std::abs(got - expected) < 1e-4);
    }
}

TEST_CASE("transform is linear") {
    const TimeGrid grid{0.05, 101};
    CorrelationSeries c1{Channel::XX, 0, 1, grid, {}};
    CorrelationSeries c2{Channel::XX, 0, 1, grid, {}};
    CorrelationSeries mix{Channel::XX, 0, 1, grid, {}};
    const Complex a(0.3, -0.4), b(1.7, 0.2);
    for (int i = 0; i < grid.count; ++i) {
        const double t = grid.t(i);
        c1.values.push_back(Complex(std::cos(2.1 * t), std::sin(0.4 * t)));
        c2.values.push_back(Complex(std::sin(1.3 * t), std::cos(3.7 * t)));
        mix.values.push_back(a * c1.values.back() + b * c2.values.back());
    }
    const double eps = 0.2, omega = 0.9;
    const Complex lhs = half_line_fourier(mix, omega, eps);
    const Complex rhs =
        a * half_line_fourier(c1, omega, eps) + b * half_line_fourier(c2, omega, eps);
    CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("transform config invariants") {
    TransformConfig cfg;
    cfg.epsilon = 0.1;
    cfg.t_max = 10.0; // eps * t_max = 1 < 5
    CHECK_THROWS_AS(cfg.validate(4.0), std::invalid_argument);
    cfg.t_max = 60.0;
    cfg.dt = 1.0; // too coarse for band top 4
    CHECK_THROWS_AS(cfg.validate(4.0), std::invalid_argument);
    cfg.dt = 0.05;
    CHECK_NOTHROW(cfg.validate(4.0));
    cfg.epsilon = -1.0;
    CHECK_THROWS_AS(cfg.validate(4.0), std::invalid_argument);
}

TEST_CASE("J = 0 DSF keeps only the autocorrelation") {
    const ChainSpec spec{6, 1.0, 0.0, Boundary::Open};
    TransformConfig cfg;
    cfg.epsilon = 0.25;
    cfg.t_max = 48.0;
    cfg.dt = 0.01;
    const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                  all_separations(6), cfg.grid(), 1);
    for (double omega : {-1.0, 0.5, 1.5}) {
        const Complex got = dsf(Channel::XX, 0.0, omega, corr, cfg).value;
        const Complex expected = Complex(0.0, 1.0) / Complex(omega - 2.0, cfg.epsilon);
        CHECK(std::abs(got - expected) < 1e-4);
    }
}

TEST_CASE("xy and yx structure factors are antisymmetric") {
    const ChainSpec spec{6, 1.0, 0.9, Boundary::Open};
    TransformConfig cfg;
    cfg.epsilon = 0.3;
    cfg.t_max = 20.0;
    cfg.dt = 0.02;
    const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                  all_separations(6), cfg.grid(), 1);
    for (double omega : {-0.7, 0.0, 1.1}) {
        const Complex sxy = dsf(Channel::XY, 0.0, omega, corr, cfg).value;
        const Complex syx = dsf(Channel::YX, 0.0, omega, corr, cfg).value;
        CHECK(std::abs(sxy + syx) < 1e-10);
    }
}

TEST_CASE("time-domain DSF matches the eigen-sum at matched broadening") {
    const ChainSpec spec{6, 1.0, 0.75, Boundary::Open};
    TransformConfig cfg;
    cfg.epsilon = 0.15;
    cfg.t_max = 80.0;
    cfg.dt = 0.02;
    const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                  all_separations(6), cfg.grid(), 1);
    const ChainCorrelationOracle oracle{spec};
    for (double omega : {-2.0, -0.5, 0.8, 2.5}) {
        for (Channel ch : {Channel::XX, Channel::XY, Channel::YY}) {
            const Complex td = dsf(ch, 0.0, omega, corr, cfg).value;
            const Complex es = dsf_spectral_oracle(oracle, ch, 0.0, omega, cfg.epsilon,
                                                   AnchorPolicy::averaged());
            INFO("channel=" << to_string(ch) << " omega=" << omega);
            CHECK(std::abs(td - es) < 2e-3);
        }
    }
}

TEST_CASE("monotone convergence of the resonant part as epsilon shrinks") {
    // J = 0: Re S(0, omega) = eps / ((omega - 2)^2 + eps^2), strictly
    // decreasing in eps below the resonance scale.
    const ChainSpec spec{4, 1.0, 0.0, Boundary::Open};
    const double omega = 0.4; // |omega - 2| = 1.6 >> 5 eps
    double previous = 1e9;
    for (double eps : {0.3, 0.15, 0.075}) {
        TransformConfig cfg;
        cfg.epsilon = eps;
        cfg.t_max = 10.0 / eps;
        cfg.dt = 0.02;
        const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                      all_separations(4), cfg.grid(), 1);
        const double re = dsf(Channel::XX, 0.0, omega, corr, cfg).value.real();
        CHECK(re > 0.0);
        CHECK(re < previous);
        previous = re;
    }
}

TEST_CASE("epsilon halving changes the off-resonant value mildly") {
    const ChainSpec spec{6, 1.0, 0.9, Boundary::Open};
    const double omega = -1.3; // far below every excitation
    Complex values[2];
    int idx = 0;
    for (double eps : {0.2, 0.1}) {
        TransformConfig cfg;
        cfg.epsilon = eps;
        cfg.t_max = 60.0 * (0.2 / eps);
        cfg.dt = 0.02;
        const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                      all_separations(6), cfg.grid(), 1);
        values[idx++] = dsf(Channel::XX, 0.0, omega, corr, cfg).value;
    }
    CHECK(std::abs(values[1] - values[0]) < 0.1 * std::abs(values[0]) + 1e-3);
}

TEST_CASE("include_n0 = false removes the autocorrelation") {
    const ChainSpec spec{4, 1.0, 0.0, Boundary::Open};
    TransformConfig cfg;
    cfg.epsilon = 0.25;
    cfg.t_max = 40.0;
    cfg.dt = 0.02;
    const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                  all_separations(4), cfg.grid(), 1);
    TransformConfig no_n0 = cfg;
    no_n0.include_n0 = false;
    // at J = 0 only n = 0 contributes, so the truncated sum vanishes
    CHECK(std::abs(dsf(Channel::XX, 0.0, 0.7, corr, no_n0).value) < 1e-12);
    CHECK(std::abs(dsf(Channel::XX, 0.0, 0.7, corr, cfg).value) > 0.1);
}

TEST_CASE("k dependence enters through cos(k n) weights") {
    const ChainSpec spec{6, 1.0, 1.1, Boundary::Open};
    TransformConfig cfg;
    cfg.epsilon = 0.3;
    cfg.t_max = 20.0;
    cfg.dt = 0.02;
    const CorrelationSet corr = correlation_sweep(spec, AnchorPolicy::averaged(),
                                                  all_separations(6), cfg.grid(), 1);
    const double omega = 0.6;
    Complex manual(0.0, 0.0);
    const double k = 0.9;
    manual += half_line_fourier(corr.series(Channel::XX, 0), omega, cfg.epsilon);
    for (int n = 1; n <= 5; ++n)
        manual += 2.0 * std::cos(k * n) *
                  half_line_fourier(corr.series(Channel::XX, n), omega, cfg.epsilon);
    CHECK(std::abs(dsf(Channel::XX, k, omega, corr, cfg).value - manual) < 1e-13);
}
