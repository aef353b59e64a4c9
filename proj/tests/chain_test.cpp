#include <catch2/catch.hpp>

#include <algorithm>
#include <vector>

#include "spinbus/chain.hpp"
#include "spinbus/exact.hpp"

using namespace spinbus;

namespace {

double orthonormality_defect(const Eigen::MatrixXd& rows) {
    const Eigen::MatrixXd g = rows * rows.transpose();
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

/// All 2^N energies of the free-fermion solution: E_0 + subset sums of the
/// quasiparticle energies, with E_0 = -1/2 sum_p Lambda_p (H' is traceless).
std::vector<double> reconstructed_spectrum(const SpectralSolution& sol) {
    const int n = static_cast<int>(sol.energies.size());
    const double e0 = -0.5 * sol.energies.sum();
    std::vector<double> out;
    out.reserve(std::size_t(1) << n);
    for (long mask = 0; mask < (long(1) << n); ++mask) {
        double e = e0;
        for (int p = 0; p < n; ++p)
            if (mask & (long(1) << p)) e += sol.energies(p);
        out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("chain spec invariants") {
    CHECK_THROWS_AS((ChainSpec{1, 1.0, 0.0, Boundary::Open}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ChainSpec{4, 0.0, 0.0, Boundary::Open}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ChainSpec{4, 1.0, -0.5, Boundary::Open}.validate()), std::invalid_argument);
    CHECK_NOTHROW((ChainSpec{4, 1.0, 0.5, Boundary::Open}.validate()));
}

TEST_CASE("periodic spectrum at lambda = 0 is flat at 2 Gamma") {
    const ChainSpec spec{8, 1.3, 0.0, Boundary::Periodic};
    const SpectralSolution sol = periodic_spectrum(spec);
    for (Eigen::Index p = 0; p < sol.energies.size(); ++p)
        CHECK(sol.energies(p) == Approx(2.0 * 1.3).epsilon(1e-14));
}

TEST_CASE("periodic lambda = 2 has energy 6 Gamma at k = 0") {
    const int n = 8;
    const ChainSpec spec{n, 1.0, 2.0, Boundary::Periodic};
    const SpectralSolution sol = periodic_spectrum(spec);
    // rows ordered by m = -N/2 .. N/2-1, so m = 0 sits at row N/2
    CHECK(sol.energies(n / 2) == Approx(6.0).epsilon(1e-14));
}

TEST_CASE("periodic zero mode at criticality") {
    const ChainSpec spec{12, 1.0, 1.0, Boundary::Periodic};
    const SpectralSolution sol = periodic_spectrum(spec);
    CHECK(sol.energies(0) == Approx(0.0).margin(1e-12)); // m = -N/2 row
    CHECK(energy_gap(sol) == Approx(0.0).margin(1e-12));
    // zero-mode rows have per-component magnitude 1/sqrt(N), Psi = +Phi
    for (int j = 0; j < 12; ++j) {
        CHECK(std::abs(sol.phi(0, j)) == Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));
        CHECK(sol.psi(0, j) == Approx(sol.phi(0, j)).epsilon(1e-12));
    }
}

TEST_CASE("periodic gap law 2 Gamma |1 - lambda| for even N") {
    for (double lambda : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        for (int n : {8, 20}) {
            const ChainSpec spec{n, 1.0, lambda, Boundary::Periodic};
            const double gap = energy_gap(periodic_spectrum(spec));
            CHECK(gap == Approx(2.0 * std::abs(1.0 - lambda)).margin(1e-12));
        }
    }
}

TEST_CASE("row orthonormality for periodic and open solutions") {
    for (int n : {7, 8, 13}) {
        for (double lambda : {0.0, 0.5, 1.0, 1.7}) {
            const ChainSpec pspec{n, 1.0, lambda, Boundary::Periodic};
            const SpectralSolution p = periodic_spectrum(pspec);
            CHECK(orthonormality_defect(p.phi) < 1e-10);
            CHECK(orthonormality_defect(p.psi) < 1e-10);
            CHECK(p.energies.minCoeff() >= -1e-15);

            const ChainSpec ospec{n, 1.0, lambda, Boundary::Open};
            const SpectralSolution o = open_spectrum(ospec);
            CHECK(orthonormality_defect(o.phi) < 1e-10);
            CHECK(orthonormality_defect(o.psi) < 1e-10);
            CHECK(o.energies.minCoeff() >= -1e-15);
        }
    }
}

TEST_CASE("open chain with J = 0 is flat at 2 Omega with identity vectors") {
    const ChainSpec spec{2, 1.0, 0.0, Boundary::Open};
    const SpectralSolution sol = open_spectrum(spec);
    CHECK(sol.energies(0) == Approx(2.0));
    CHECK(sol.energies(1) == Approx(2.0));
    CHECK((sol.phi - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sol.psi - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    const ChainSpec spec6{6, 0.7, 0.0, Boundary::Open};
    const SpectralSolution sol6 = open_spectrum(spec6);
    for (Eigen::Index p = 0; p < 6; ++p) CHECK(sol6.energies(p) == Approx(1.4).epsilon(1e-13));
    CHECK(energy_gap(sol6) == Approx(1.4).epsilon(1e-13));
}

TEST_CASE("open N = 2 energies match the dense 4-dim single-particle gaps") {
    const ChainSpec spec{2, 1.0, 0.5, Boundary::Open};
    const SpectralSolution sol = open_spectrum(spec);
    const DenseSystem dense = dense_chain(spec);
    // every dense level must be E_0^ff + a subset sum of the quasiparticle energies
    const auto rebuilt = reconstructed_spectrum(sol);
    REQUIRE(rebuilt.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(rebuilt[i] == Approx(dense.energies(i)).margin(1e-10));
}

TEST_CASE("open N = 6 full free-fermion spectrum matches dense diagonalization") {
    for (double lambda : {0.35, 1.0, 1.6}) {
        const ChainSpec spec{6, 1.0, lambda, Boundary::Open};
        const SpectralSolution sol = open_spectrum(spec);
        const DenseSystem dense = dense_chain(spec);
        const auto rebuilt = reconstructed_spectrum(sol);
        REQUIRE(rebuilt.size() == 64);
        for (int i = 0; i < 64; ++i)
            CHECK(rebuilt[std::size_t(i)] == Approx(dense.energies(i)).margin(1e-8));
    }
}

TEST_CASE("psi rows satisfy Psi Lambda = Phi (A - B)") {
    const int n = 8;
    const double j = 0.9;
    const ChainSpec spec{n, 1.0, j, Boundary::Open};
    const SpectralSolution sol = open_spectrum(spec);
    Eigen::MatrixXd amb = Eigen::MatrixXd::Zero(n, n); // A - B
    for (int i = 0; i < n; ++i) {
        amb(i, i) = 2.0;
        if (i + 1 < n) amb(i + 1, i) = 2.0 * j; // A - B keeps only the subdiagonal
    }
    for (int p = 0; p < n; ++p) {
        const Eigen::RowVectorXd lhs = sol.psi.row(p) * sol.energies(p);
        const Eigen::RowVectorXd rhs = sol.phi.row(p) * amb;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("energy gap of the open critical chain closes as 1/N") {
    const ChainSpec small{8, 1.0, 1.0, Boundary::Open};
    const ChainSpec large{24, 1.0, 1.0, Boundary::Open};
    const double g_small = energy_gap(open_spectrum(small));
    const double g_large = energy_gap(open_spectrum(large));
    CHECK(g_small < 0.5);
    CHECK(g_large < g_small / 2.5);
}

TEST_CASE("boundary mismatch is rejected") {
    CHECK_THROWS_AS(periodic_spectrum(ChainSpec{4, 1.0, 0.5, Boundary::Open}),
                    std::invalid_argument);
    CHECK_THROWS_AS(open_spectrum(ChainSpec{4, 1.0, 0.5, Boundary::Periodic}),
                    std::invalid_argument);
}
