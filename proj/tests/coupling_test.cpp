#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "spinbus/coupling.hpp"
#include "spinbus/exact.hpp"

using namespace spinbus;

namespace {

DsfInputs random_inputs(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return DsfInputs{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)},
                     {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
}

} // namespace

TEST_CASE("zero system-bath coupling leaves the bare splittings") {
    std::mt19937 rng(5);
    const DsfInputs in = random_inputs(rng);
    const EffectiveCouplings c = couplings_from_dsf(in, 0.0, 0.0, 1.3);
    CHECK(c.mu_a == 1.3);
    CHECK(c.mu_b == 1.3);
    CHECK(c.g1 == 0.0);
    CHECK(c.g2 == 0.0);
    CHECK(c.residual_imag == 0.0);
}

TEST_CASE("equal couplings give equal splittings") {
    std::mt19937 rng(6);
    const DsfInputs in = random_inputs(rng);
    const EffectiveCouplings c = couplings_from_dsf(in, 0.17, 0.17, 0.9);
    CHECK(c.mu_a == c.mu_b);
}

TEST_CASE("splitting corrections scale as the squared couplings") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const DsfInputs in = random_inputs(rng);
        const double mu = 1.1, ja = 0.23, jb = 0.11;
        const EffectiveCouplings c = couplings_from_dsf(in, ja, jb, mu);
        CHECK((c.mu_a - mu) ==
              Approx((ja * ja) / (jb * jb) * (c.mu_b - mu)).margin(1e-14));
    }
}

TEST_CASE("the closed-form lambda = 0 couplings come out of the formulas") {
    // J = 0 chain: S^xx = S^yy = i/(omega - 2 Omega + i eps),
    // S^xy = 1/(omega - 2 Omega + i eps); mu_A = mu + 4 J_A^2 Re L(mu),
    // g1 = 4 J_A J_B Re L(mu), g2 = 0, with L(w) = 1/(w - 2 Omega + i eps).
    const double om_chain = 1.0, mu = 1.0, eps = 0.2, ja = 0.1, jb = 0.07;
    auto lorentz = [&](double w) { return 1.0 / Complex(w - 2.0 * om_chain, eps); };
    DsfInputs in;
    in.xx_plus = Complex(0.0, 1.0) * lorentz(mu);
    in.xx_minus = Complex(0.0, 1.0) * lorentz(-mu);
    in.yy_plus = in.xx_plus;
    in.yy_minus = in.xx_minus;
    in.xy_plus = lorentz(mu);
    in.xy_minus = lorentz(-mu);
    const EffectiveCouplings c = couplings_from_dsf(in, ja, jb, mu);
    CHECK(c.mu_a == Approx(mu + 4.0 * ja * ja * lorentz(mu).real()).margin(1e-14));
    CHECK(c.g1 == Approx(4.0 * ja * jb * lorentz(mu).real()).margin(1e-14));
    CHECK(c.g2 == Approx(0.0).margin(1e-14));
}

TEST_CASE("non-finite inputs are rejected") {
    DsfInputs in{};
    in.xx_plus = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(couplings_from_dsf(in, 0.1, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("build_heff structure") {
    SECTION("diagonal case") {
        const TwoQubitHamiltonian h = build_heff({1.4, 1.4, 0.0, 0.0, 0.0});
        CHECK(h.matrix(0, 0).real() == Approx(1.4));
        CHECK(h.matrix(1, 1).real() == Approx(0.0).margin(1e-15));
        CHECK(h.matrix(2, 2).real() == Approx(0.0).margin(1e-15));
        CHECK(h.matrix(3, 3).real() == Approx(-1.4));
        CHECK(h.matrix.cwiseAbs().sum() == Approx(2.8));
    }
    SECTION("flip-flop block eigenvalues") {
        const TwoQubitHamiltonian h = build_heff({1.0, 1.0, 0.25, 0.0, 0.0});
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h.matrix);
        CHECK(es.eigenvalues()(0) == Approx(-1.0));
        CHECK(es.eigenvalues()(1) == Approx(-0.25));
        CHECK(es.eigenvalues()(2) == Approx(0.25));
        CHECK(es.eigenvalues()(3) == Approx(1.0));
    }
    SECTION("always Hermitian") {
        std::mt19937 rng(8);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int rep = 0; rep < 20; ++rep) {
            const TwoQubitHamiltonian h =
                build_heff({u(rng), u(rng), u(rng), u(rng), 0.0});
            CHECK((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("pipeline couplings at lambda = 0 match the analytic forms") {
    const double mu = 1.0, ja = 0.1, jb = 0.1, eps = 0.2;
    ChainSpec spec{6, 1.0, 0.0, Boundary::Open};
    PipelineConfig cfg;
    cfg.mu = mu;
    cfg.j_a = ja;
    cfg.j_b = jb;
    cfg.transform.epsilon = eps;
    cfg.transform.t_max = 60.0;
    cfg.transform.dt = 0.01;
    cfg.anchor = AnchorPolicy::averaged();
    cfg.threads = 1;
    const CouplingResult r = pipeline_couplings(spec, cfg);

    auto lorentz_re = [&](double w) {
        return (w - 2.0) / ((w - 2.0) * (w - 2.0) + eps * eps);
    };
    const double mu_a_expected = mu + 2.0 * ja * ja * (lorentz_re(mu) + lorentz_re(mu)); // = mu + 4 Ja^2 L(mu)
    CHECK(r.couplings.mu_a == Approx(mu_a_expected).margin(2e-4));
    CHECK(r.couplings.g1 == Approx(4.0 * ja * jb * lorentz_re(mu)).margin(2e-4));
    CHECK(std::abs(r.couplings.g2) < 2e-4);
}

TEST_CASE("pipeline couplings agree with the matched Froehlich oracle") {
    const double mu = 1.0, j = 0.1;
    ChainSpec spec{6, 1.0, 0.75, Boundary::Open};
    PipelineConfig cfg;
    cfg.mu = mu;
    cfg.j_a = j;
    cfg.j_b = j;
    cfg.transform.epsilon = 0.15;
    cfg.transform.t_max = 80.0;
    cfg.transform.dt = 0.02;
    cfg.anchor = AnchorPolicy::averaged();
    cfg.threads = 1;
    const CouplingResult dsf_route = pipeline_couplings(spec, cfg);
    const FrohlichExact oracle = frohlich_couplings_exact(spec, mu, j, j, 0.15);

    CHECK(dsf_route.couplings.g1 ==
          Approx(oracle.couplings.g1).epsilon(2e-3));
    CHECK(dsf_route.couplings.mu_a == Approx(oracle.couplings.mu_a).epsilon(1e-3));
    CHECK(dsf_route.couplings.g2 == Approx(oracle.couplings.g2).margin(5e-5));
}

TEST_CASE("near-resonance detection") {
    const ChainSpec spec{8, 1.0, 0.75, Boundary::Open};
    const SpectralSolution sol = open_spectrum(spec);
    // lowest quasiparticle sits near 2|1 - lambda| = 0.5
    CHECK(near_resonance(sol, energy_gap(sol), 0.15));
    CHECK_FALSE(near_resonance(sol, -10.0, 0.15));
}

TEST_CASE("coupling sweep is deterministic and thread-insensitive") {
    PipelineConfig cfg;
    cfg.mu = 1.0;
    cfg.j_a = 0.1;
    cfg.j_b = 0.1;
    cfg.transform.epsilon = 0.5;
    cfg.transform.t_max = 12.0;
    cfg.transform.dt = 0.05;
    cfg.anchor = AnchorPolicy::centered();
    const ChainSpec chain{4, 1.0, 0.0, Boundary::Open};
    const std::vector<double> grid{0.3, 0.8, 1.3};

    cfg.threads = 1;
    const auto a = coupling_sweep(grid, chain, cfg);
    cfg.threads = 3;
    const auto b = coupling_sweep(grid, chain, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].lambda == b[i].lambda);
        CHECK(a[i].couplings.g1 == b[i].couplings.g1);
        CHECK(a[i].couplings.mu_a == b[i].couplings.mu_a);
        CHECK(a[i].couplings.g2 == b[i].couplings.g2);
    }
}

TEST_CASE("discarded imaginary residue shrinks with the broadening") {
    // off resonance the residue is the broadened delta content, O(eps)
    ChainSpec spec{6, 1.0, 0.75, Boundary::Open};
    PipelineConfig cfg;
    cfg.mu = 0.2; // far below the band bottom 2|1 - lambda| = 0.5
    cfg.j_a = 0.1;
    cfg.j_b = 0.1;
    cfg.anchor = AnchorPolicy::averaged();
    cfg.threads = 1;
    double previous = 1e9;
    for (double eps : {0.3, 0.15, 0.075}) {
        cfg.transform.epsilon = eps;
        cfg.transform.t_max = 8.0 / eps;
        cfg.transform.dt = 0.02;
        const CouplingResult r = pipeline_couplings(spec, cfg);
        CHECK(r.couplings.residual_imag < previous);
        previous = r.couplings.residual_imag;
    }
    CHECK(previous < 0.05);
}
