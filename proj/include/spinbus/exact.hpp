#ifndef SPINBUS_EXACT_HPP
#define SPINBUS_EXACT_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <algorithm>

#include "spinbus/chain.hpp"
#include "spinbus/coupling.hpp"
#include "spinbus/dynamics.hpp"
#include "spinbus/parallel.hpp"

namespace spinbus {

// Basis-index conventions for the dense oracles.  Chain-only systems use bit
// j-1 for site j.  Full systems use bit 0 = spin A, bit 1 = spin B, bits
// 2..N+1 = chain sites in order.  Bit value 1 is |e> (sz = +1), 0 is |g>.

namespace detail {

inline void check_chain_cap(int n, int cap, const char* who) {
    if (n > cap)
        throw std::invalid_argument(std::string(who) + ": N=" + std::to_string(n) +
                                    " refused; dense cost grows as 8^N (cap " +
                                    std::to_string(cap) + ")");
}

/// H' = Omega sum_j sz_j + J sum_j sx_j sx_{j+1} on the given bit range
/// (wrap bond included for periodic boundary).
inline void add_chain_hamiltonian(Eigen::MatrixXd& h, const ChainSpec& spec, int first_bit) {
    const int n = spec.n_sites;
    const std::int64_t dim = h.rows();
    const double om = spec.field;
    const double j = spec.coupling;
    for (std::int64_t b = 0; b < dim; ++b) {
        double diag = 0.0;
        for (int s = 0; s < n; ++s) diag += ((b >> (first_bit + s)) & 1) ? om : -om;
        h(b, b) += diag;
    }
    const int n_bonds = (spec.boundary == Boundary::Periodic) ? n : n - 1;
    for (int bond = 0; bond < n_bonds; ++bond) {
        const std::int64_t mask = (std::int64_t(1) << (first_bit + bond)) |
                                  (std::int64_t(1) << (first_bit + (bond + 1) % n));
        for (std::int64_t b = 0; b < dim; ++b) h(b ^ mask, b) += j;
    }
}

} // namespace detail

/// Dense eigensystem, real symmetric in the sz product basis.
struct DenseSystem {
    Eigen::MatrixXd hamiltonian;
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // columns
    double max_eigen_residual = 0.0;

    void solve() {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonian);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("DenseSystem: eigensolver failed to converge");
        energies = es.eigenvalues();
        vectors = es.eigenvectors();
        // spot-check the residual on the edges of the spectrum
        const Eigen::Index dim = energies.size();
        double worst = 0.0;
        for (Eigen::Index i : {Eigen::Index(0), Eigen::Index(1), dim - 1}) {
            if (i < 0 || i >= dim) continue;
            worst = std::max(worst, (hamiltonian * vectors.col(i) - energies(i) * vectors.col(i))
                                        .norm());
        }
        max_eigen_residual = worst;
        if (worst > 1e-9 * std::max(1.0, energies.cwiseAbs().maxCoeff()))
            throw std::runtime_error("DenseSystem: eigen-residual above tolerance");
    }
};

/// Chain-only dense diagonalization (dimension 2^N).
inline DenseSystem dense_chain(const ChainSpec& spec) {
    spec.validate();
    detail::check_chain_cap(spec.n_sites, 12, "dense_chain");
    const std::int64_t dim = std::int64_t(1) << spec.n_sites;
    DenseSystem sys;
    sys.hamiltonian = Eigen::MatrixXd::Zero(dim, dim);
    detail::add_chain_hamiltonian(sys.hamiltonian, spec, 0);
    sys.solve();
    return sys;
}

/// Full system: two spins + chain (dimension 2^{N+2}),
///   H = mu/2 (sz_A + sz_B) + H'_chain
///     + sum_alpha sum_j (2 J_alpha / sqrt(N)) (s+_j s-_alpha + s-_j s+_alpha).
inline DenseSystem full_hamiltonian(const ChainSpec& spec, double mu, double j_a, double j_b) {
    spec.validate();
    detail::check_chain_cap(spec.n_sites, 12, "full_hamiltonian");
    const int n = spec.n_sites;
    const std::int64_t dim = std::int64_t(1) << (n + 2);
    DenseSystem sys;
    sys.hamiltonian = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd& h = sys.hamiltonian;

    for (std::int64_t b = 0; b < dim; ++b) {
        const double za = (b & 1) ? 1.0 : -1.0;
        const double zb = (b & 2) ? 1.0 : -1.0;
        h(b, b) += mu / 2.0 * (za + zb);
    }
    detail::add_chain_hamiltonian(h, spec, 2);

    const double coupling[2] = {2.0 * j_a / std::sqrt(double(n)), 2.0 * j_b / std::sqrt(double(n))};
    for (int alpha = 0; alpha < 2; ++alpha) {
        const std::int64_t spin_mask = std::int64_t(1) << alpha;
        for (int site = 0; site < n; ++site) {
            const std::int64_t chain_mask = std::int64_t(1) << (2 + site);
            for (std::int64_t b = 0; b < dim; ++b) {
                // s+_j s-_alpha: needs chain bit clear, spin bit set
                if (!(b & chain_mask) && (b & spin_mask))
                    h((b | chain_mask) & ~spin_mask, b) += coupling[alpha];
                // s-_j s+_alpha: needs chain bit set, spin bit clear
                if ((b & chain_mask) && !(b & spin_mask))
                    h((b & ~chain_mask) | spin_mask, b) += coupling[alpha];
            }
        }
    }
    sys.solve();
    return sys;
}

struct ReducedDensityResult {
    TwoQubitDensity rho;
    bool degenerate_ground = false;
};

/// Partial trace of the ground-state projector over the chain.  A ground-space
/// gap below 1e-10 is flagged; the lowest-index eigenvector is used.
inline ReducedDensityResult ground_reduced_density(const DenseSystem& sys) {
    const std::int64_t dim = sys.energies.size();
    if (dim < 8 || (dim & (dim - 1)) != 0)
        throw std::invalid_argument("ground_reduced_density: full system required");
    const std::int64_t n_chain_states = dim / 4;

    const bool degenerate = (dim > 1) && (sys.energies(1) - sys.energies(0) < 1e-10);
    const Eigen::VectorXd& psi = sys.vectors.col(0);

    // basis order |ee>, |eg>, |ge>, |gg>  ->  (bitA, bitB) = (1,1),(1,0),(0,1),(0,0)
    const int bits_of[4][2] = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            double acc = 0.0;
            const std::int64_t r_off = bits_of[r][0] + 2 * bits_of[r][1];
            const std::int64_t c_off = bits_of[c][0] + 2 * bits_of[c][1];
            for (std::int64_t ch = 0; ch < n_chain_states; ++ch)
                acc += psi(r_off + 4 * ch) * psi(c_off + 4 * ch);
            rho(r, c) = acc;
        }
    return {TwoQubitDensity::from_matrix(rho), degenerate};
}

/// Heisenberg-picture two-point oracle for the open chain:
///   <0| e^{iHt} sigma_j^alpha e^{-iHt} sigma_{j+n}^beta |0>
/// from the dense eigensystem.  N <= 8.
class ChainCorrelationOracle {
public:
    explicit ChainCorrelationOracle(const ChainSpec& spec) : spec_(spec) {
        detail::check_chain_cap(spec.n_sites, 8, "chain_correlation_exact");
        sys_ = dense_chain(spec);
    }

    /// alpha, beta in {'x', 'y'}; sites 1-based; the alpha operator at site j
    /// carries the time argument.
    Complex correlation(char alpha, char beta, int j, int n, double t) const {
        const int site_b = j + n;
        if (j < 1 || site_b < 1 || j > spec_.n_sites || site_b > spec_.n_sites)
            throw std::out_of_range("chain_correlation_exact: site out of range");
        const Eigen::VectorXd psi0 = sys_.vectors.col(0);
        const Eigen::VectorXcd u = apply_pauli_transposed(alpha, j, psi0);
        const Eigen::VectorXcd w = apply_pauli(beta, site_b, psi0);
        const Eigen::VectorXcd a = to_eigenbasis(u);
        const Eigen::VectorXcd b = to_eigenbasis(w);
        const double e0 = sys_.energies(0);
        Complex acc(0.0, 0.0);
        for (Eigen::Index m = 0; m < sys_.energies.size(); ++m)
            acc += a(m) * b(m) * std::exp(Complex(0.0, (e0 - sys_.energies(m)) * t));
        return acc;
    }

    Complex correlation(Channel ch, int j, int n, double t) const {
        switch (ch) {
            case Channel::XX: return correlation('x', 'x', j, n, t);
            case Channel::XY: return correlation('x', 'y', j, n, t);
            case Channel::YX: return correlation('y', 'x', j, n, t);
            default: return correlation('y', 'y', j, n, t);
        }
    }

    const DenseSystem& system() const { return sys_; }
    const ChainSpec& chain() const { return spec_; }

    /// sigma^alpha_site v (1-based site, chain-only bit layout)
    static Eigen::VectorXcd apply_pauli(char alpha, int site, const Eigen::VectorXd& v) {
        const std::int64_t dim = v.size();
        const std::int64_t mask = std::int64_t(1) << (site - 1);
        Eigen::VectorXcd out(dim);
        for (std::int64_t b = 0; b < dim; ++b) {
            const Complex src = Complex(v(b ^ mask), 0.0);
            if (alpha == 'x') {
                out(b) = src;
            } else { // sigma^y: <e|sy|g> = -i, <g|sy|e> = +i
                out(b) = (b & mask) ? Complex(0.0, -1.0) * src : Complex(0.0, 1.0) * src;
            }
        }
        return out;
    }

    /// (sigma^alpha)^T v; sigma^x is symmetric, sigma^y antisymmetric.
    static Eigen::VectorXcd apply_pauli_transposed(char alpha, int site,
                                                   const Eigen::VectorXd& v) {
        Eigen::VectorXcd out = apply_pauli(alpha, site, v);
        if (alpha == 'y') out = -out;
        return out;
    }

    /// V^T u for a complex vector over the real eigenvector matrix.
    Eigen::VectorXcd to_eigenbasis(const Eigen::VectorXcd& u) const {
        const Eigen::VectorXd re = sys_.vectors.transpose() * u.real();
        const Eigen::VectorXd im = sys_.vectors.transpose() * u.imag();
        Eigen::VectorXcd out(re.size());
        out.real() = re;
        out.imag() = im;
        return out;
    }

private:
    ChainSpec spec_;
    DenseSystem sys_;
};

inline Complex chain_correlation_exact(const ChainSpec& spec, Channel ch, int j, int n,
                                       double t) {
    return ChainCorrelationOracle(spec).correlation(ch, j, n, t);
}

/// Spectral-representation DSF with the same spatial structure as the
/// time-domain route:
///   S(k, omega) = i sum_n e^{ikn} sum_m A^alpha_{j m} A^beta_{j+n, m}
///                 / (E_0 - E_m + omega + i eps).
/// The alpha operator sits at the lower site of each pair and the -n term
/// reuses the +n pair sum, exactly as the time-domain route does (for the
/// averaged policy the two conventions agree identically, by reflection
/// symmetry of the open chain).
inline Complex dsf_spectral_oracle(const ChainCorrelationOracle& oracle, Channel channel,
                                   double k, double omega, double epsilon,
                                   const AnchorPolicy& policy, int n_max = -1,
                                   bool include_n0 = true) {
    const int n_sites = oracle.chain().n_sites;
    if (n_max < 0 || n_max > n_sites - 1) n_max = n_sites - 1;
    const DenseSystem& sys = oracle.system();
    const Eigen::VectorXd psi0 = sys.vectors.col(0);
    const double e0 = sys.energies(0);

    char alpha = 'x', beta = 'x';
    switch (channel) {
        case Channel::XX: break;
        case Channel::XY: beta = 'y'; break;
        case Channel::YX: alpha = 'y'; break;
        case Channel::YY: alpha = beta = 'y'; break;
    }

    // site-resolved amplitude tables A_{site,m} = <0| sigma_site |m>
    const auto amps = [&](char op, bool transposed) {
        Eigen::MatrixXcd table(n_sites, sys.energies.size());
        for (int s = 1; s <= n_sites; ++s) {
            const Eigen::VectorXcd v = transposed
                                           ? ChainCorrelationOracle::apply_pauli_transposed(op, s, psi0)
                                           : ChainCorrelationOracle::apply_pauli(op, s, psi0);
            const Eigen::VectorXd re = sys.vectors.transpose() * v.real();
            const Eigen::VectorXd im = sys.vectors.transpose() * v.imag();
            for (Eigen::Index m = 0; m < re.size(); ++m) table(s - 1, m) = Complex(re(m), im(m));
        }
        return table;
    };
    const Eigen::MatrixXcd amp_alpha = amps(alpha, true);
    const Eigen::MatrixXcd amp_beta = amps(beta, false);

    Complex acc(0.0, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        if (n == 0 && !include_n0) continue;
        Complex pair_sum(0.0, 0.0);
        if (policy.mode == AnchorPolicy::Mode::Averaged) {
            for (int j = 1; j + n <= n_sites; ++j)
                for (Eigen::Index m = 0; m < sys.energies.size(); ++m)
                    pair_sum += amp_alpha(j - 1, m) * amp_beta(j + n - 1, m) /
                                Complex(e0 - sys.energies(m) + omega, epsilon);
            pair_sum /= double(n_sites);
        } else {
            const int j = policy.anchor_for(n, n_sites);
            for (Eigen::Index m = 0; m < sys.energies.size(); ++m)
                pair_sum += amp_alpha(j - 1, m) * amp_beta(j + n - 1, m) /
                            Complex(e0 - sys.energies(m) + omega, epsilon);
        }
        const double weight = (n == 0) ? 1.0 : 2.0 * std::cos(k * n);
        acc += weight * pair_sum;
    }
    return Complex(0.0, 1.0) * acc;
}

struct FrohlichExact {
    EffectiveCouplings couplings;
    long excluded_pairs = 0;
    Eigen::Matrix4cd h_el = Eigen::Matrix4cd::Zero();
};

/// Second-order effective two-spin Hamiltonian by the direct sum
///   H_el(s', s) = 1/2 sum_{m, s''} <s'0|H_I|s''m><s''m|H_I|s0>
///                 [ D(E_{s0} - E_{s''m}) + D(E_{s'0} - E_{s''m}) ]
/// over chain eigenstates m and intermediate spin states s''.  With
/// epsilon = 0, D(x) = 1/x and resonant pairs (|x| < 1e-8 with nonvanishing
/// numerator) are excluded and counted; with epsilon > 0,
/// D(x) = x / (x^2 + epsilon^2), the regularization matched to the
/// broadened-DSF route.  Couplings are extracted by projecting H_C + H_el
/// onto the effective-Hamiltonian operator basis.
inline FrohlichExact frohlich_couplings_exact(const ChainSpec& spec, double mu, double j_a,
                                              double j_b, double epsilon = 0.0) {
    spec.validate();
    detail::check_chain_cap(spec.n_sites, 12, "frohlich_couplings_exact");
    const DenseSystem sys = dense_chain(spec);
    const std::int64_t dim = sys.energies.size();
    const int n = spec.n_sites;
    const Eigen::VectorXd psi0 = sys.vectors.col(0);
    const double e0 = sys.energies(0);

    // p_m = <0| sum_j s+_j |m>,  q_m = <0| sum_j s-_j |m>  (real)
    Eigen::VectorXd p_amp(dim), q_amp(dim);
    {
        Eigen::VectorXd raise_t = Eigen::VectorXd::Zero(dim); // (sum_j s+_j)^T psi0
        Eigen::VectorXd lower_t = Eigen::VectorXd::Zero(dim);
        for (int site = 0; site < n; ++site) {
            const std::int64_t mask = std::int64_t(1) << site;
            for (std::int64_t b = 0; b < dim; ++b) {
                if (b & mask) continue;
                // (s+)^T maps e -> g amplitude: contributes psi0(b set) at b
                raise_t(b) += psi0(b | mask);
                lower_t(b | mask) += psi0(b);
            }
        }
        p_amp = sys.vectors.transpose() * raise_t;
        q_amp = sys.vectors.transpose() * lower_t;
    }

    // two-spin operators in the |ee>,|eg>,|ge>,|gg> basis
    Eigen::Matrix4d sm[2], sp[2];
    sm[0].setZero();
    sm[0](2, 0) = sm[0](3, 1) = 1.0; // s-_A
    sm[1].setZero();
    sm[1](1, 0) = sm[1](3, 2) = 1.0; // s-_B
    sp[0] = sm[0].transpose();
    sp[1] = sm[1].transpose();
    const double spin_energy[4] = {mu, 0.0, 0.0, -mu};
    const double c_alpha[2] = {2.0 * j_a / std::sqrt(double(n)), 2.0 * j_b / std::sqrt(double(n))};

    long excluded = 0;
    auto denom = [&](double x, double numerator) -> double {
        if (epsilon > 0.0) return x / (x * x + epsilon * epsilon);
        if (std::abs(x) < 1e-8) {
            if (std::abs(numerator) > 1e-14) ++excluded;
            return 0.0;
        }
        return 1.0 / x;
    };

    Eigen::Matrix4d h_el = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d v_m, w_m;
    for (std::int64_t m = 0; m < dim; ++m) {
        const double p = p_amp(m);
        const double q = q_amp(m);
        if (std::abs(p) < 1e-15 && std::abs(q) < 1e-15) continue;
        v_m = c_alpha[0] * (p * sm[0] + q * sp[0]) + c_alpha[1] * (p * sm[1] + q * sp[1]);
        w_m = c_alpha[0] * (q * sm[0] + p * sp[0]) + c_alpha[1] * (q * sm[1] + p * sp[1]);
        const double chain_shift = e0 - sys.energies(m);
        for (int s = 0; s < 4; ++s)
            for (int sp_out = 0; sp_out < 4; ++sp_out)
                for (int mid = 0; mid < 4; ++mid) {
                    const double num = v_m(sp_out, mid) * w_m(mid, s);
                    if (num == 0.0) continue;
                    const double d1 = denom(spin_energy[s] - spin_energy[mid] + chain_shift, num);
                    const double d2 =
                        denom(spin_energy[sp_out] - spin_energy[mid] + chain_shift, num);
                    h_el(sp_out, s) += 0.5 * num * (d1 + d2);
                }
    }

    FrohlichExact out;
    out.excluded_pairs = excluded;
    out.h_el = h_el.cast<Complex>();
    EffectiveCouplings& c = out.couplings;
    c.mu_a = mu + (h_el(0, 0) + h_el(1, 1) - h_el(2, 2) - h_el(3, 3)) / 2.0;
    c.mu_b = mu + (h_el(0, 0) - h_el(1, 1) + h_el(2, 2) - h_el(3, 3)) / 2.0;
    c.g1 = (h_el(1, 2) + h_el(2, 1)) / 2.0;
    c.g2 = (h_el(0, 3) + h_el(3, 0)) / 2.0;
    c.residual_imag = std::abs(h_el(1, 2) - h_el(2, 1)) / 2.0 +
                      std::abs(h_el(0, 3) - h_el(3, 0)) / 2.0;
    return out;
}

struct FidelityPoint {
    double lambda = 0.0;
    double fidelity = 0.0;
    bool degenerate_ground = false;
};

/// Fidelity between the reduced two-spin ground state of the full Hamiltonian
/// and the ground state of the DSF-route effective Hamiltonian, per lambda.
/// The full Hamiltonian honors spec_template.boundary; the effective pipeline
/// is the open-chain one throughout.
inline std::vector<FidelityPoint> fidelity_curve(const std::vector<double>& lambdas,
                                                 const ChainSpec& spec_template,
                                                 const PipelineConfig& cfg) {
    if (lambdas.empty()) throw std::invalid_argument("fidelity_curve: empty lambda grid");
    std::vector<FidelityPoint> out(lambdas.size());
    PipelineConfig point_cfg = cfg;
    point_cfg.threads = 1;
    parallel_for(lambdas.size(), cfg.threads, [&](std::size_t i) {
        ChainSpec spec = spec_template;
        spec.coupling = lambdas[i] * spec.field;

        const DenseSystem full = full_hamiltonian(spec, cfg.mu, cfg.j_a, cfg.j_b);
        const ReducedDensityResult reduced = ground_reduced_density(full);

        ChainSpec open_spec = spec;
        open_spec.boundary = Boundary::Open;
        const CouplingResult cr = pipeline_couplings(open_spec, point_cfg);
        const TwoQubitHamiltonian heff = build_heff(cr.couplings);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(heff.matrix);
        const TwoQubitDensity rho1 = TwoQubitDensity::pure(es.eigenvectors().col(0));

        out[i] = {lambdas[i], fidelity(reduced.rho, rho1), reduced.degenerate_ground};
    });
    return out;
}

} // namespace spinbus

#endif // SPINBUS_EXACT_HPP
