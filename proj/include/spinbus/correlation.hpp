#ifndef SPINBUS_CORRELATION_HPP
#define SPINBUS_CORRELATION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spinbus/chain.hpp"
#include "spinbus/parallel.hpp"
#include "spinbus/pfaffian.hpp"

namespace spinbus {

enum class Channel { XX, XY, YX, YY };

inline const char* to_string(Channel c) {
    switch (c) {
        case Channel::XX: return "xx";
        case Channel::XY: return "xy";
        case Channel::YX: return "yx";
        default: return "yy";
    }
}

enum class ContractionKind { PP, PM, MP, MM };

/// Uniform time grid starting at t = 0.
struct TimeGrid {
    double dt = 0.05;
    int count = 801;

    double t(int i) const { return dt * i; }
    double span() const { return dt * (count - 1); }

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
        if (count < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
    }
};

/// The four site-by-site contraction matrices at one time argument:
///   pp[j][m] = <phi_j^+(t) phi_m^+>,  pm = <phi^+(t) phi^->,
///   mp = <phi^-(t) phi^+>,            mm = <phi^-(t) phi^->.
struct ContractionFrame {
    Eigen::MatrixXcd pp, pm, mp, mm;

    const Eigen::MatrixXcd& kind(ContractionKind k) const {
        switch (k) {
            case ContractionKind::PP: return pp;
            case ContractionKind::PM: return pm;
            case ContractionKind::MP: return mp;
            default: return mm;
        }
    }
};

/// Elementary-contraction evaluator over a diagonalized open chain.
/// Immutable after construction and safe to share across threads; callers own
/// the frames they request.
class ContractionTable {
public:
    explicit ContractionTable(SpectralSolution sol) : sol_(std::move(sol)) {
        if (sol_.boundary != Boundary::Open)
            throw std::invalid_argument("ContractionTable: open-boundary solution required");
        phi_c_ = sol_.phi.cast<Complex>();
        psi_c_ = sol_.psi.cast<Complex>();
        equal_time_ = frame(0.0);
    }

    int n_sites() const { return static_cast<int>(sol_.energies.size()); }
    const SpectralSolution& solution() const { return sol_; }
    const ContractionFrame& equal_time() const { return equal_time_; }

    /// Builds the four N x N matrices for time t:
    ///   pp = Phi^T D Phi, pm = Phi^T D Psi, mp = -Psi^T D Phi, mm = -Psi^T D Psi
    /// with D = diag(e^{-i Lambda_p t}).
    ContractionFrame frame(double t) const {
        const Eigen::Index n = sol_.energies.size();
        Eigen::VectorXcd d(n);
        for (Eigen::Index p = 0; p < n; ++p)
            d(p) = std::exp(Complex(0.0, -sol_.energies(p) * t));
        const Eigen::MatrixXcd dphi = d.asDiagonal() * phi_c_;
        const Eigen::MatrixXcd dpsi = d.asDiagonal() * psi_c_;
        ContractionFrame f;
        f.pp = phi_c_.transpose() * dphi;
        f.pm = phi_c_.transpose() * dpsi;
        f.mp = -psi_c_.transpose() * dphi;
        f.mm = -psi_c_.transpose() * dpsi;
        return f;
    }

    /// Single contraction <phi_j^{s}(t) phi_m^{s'}> with 1-based sites.
    Complex contraction(ContractionKind kind, int j, int m, double t) const {
        const int n = n_sites();
        if (j < 1 || j > n || m < 1 || m > n)
            throw std::invalid_argument("contraction: site index out of range");
        Complex acc(0.0, 0.0);
        for (int p = 0; p < n; ++p) {
            const Complex phase = std::exp(Complex(0.0, -sol_.energies(p) * t));
            switch (kind) {
                case ContractionKind::PP: acc += phi_c_(p, j - 1) * phi_c_(p, m - 1) * phase; break;
                case ContractionKind::PM: acc += phi_c_(p, j - 1) * psi_c_(p, m - 1) * phase; break;
                case ContractionKind::MP: acc -= psi_c_(p, j - 1) * phi_c_(p, m - 1) * phase; break;
                case ContractionKind::MM: acc -= psi_c_(p, j - 1) * psi_c_(p, m - 1) * phase; break;
            }
        }
        return acc;
    }

private:
    SpectralSolution sol_;
    Eigen::MatrixXcd phi_c_, psi_c_;
    ContractionFrame equal_time_;
};

namespace detail {

struct WickOp {
    int site;   // 1-based
    bool plus;  // phi^+ vs phi^-
    bool moved; // carries the time argument
};

inline int wick_dim(int j, int n) { return 2 * (2 * j + n - 1); }

/// Operator string of sigma_j^x(t) sigma_{j+n}^x:
///   phi_1^+(t) phi_1^-(t) ... phi_{j-1}^-(t) phi_j^+(t)
///   phi_1^+ phi_1^- ... phi_{j+n-1}^- phi_{j+n}^+
inline void build_ops(int j, int n, std::vector<WickOp>& ops) {
    ops.clear();
    ops.reserve(static_cast<std::size_t>(wick_dim(j, n)));
    for (int l = 1; l < j; ++l) {
        ops.push_back({l, true, true});
        ops.push_back({l, false, true});
    }
    ops.push_back({j, true, true});
    for (int l = 1; l < j + n; ++l) {
        ops.push_back({l, true, false});
        ops.push_back({l, false, false});
    }
    ops.push_back({j + n, true, false});
}

inline const Eigen::MatrixXcd& pick(const ContractionFrame& f, bool plus_a, bool plus_b) {
    if (plus_a) return plus_b ? f.pp : f.pm;
    return plus_b ? f.mp : f.mm;
}

/// Fills scratch with the antisymmetric contraction matrix of the operator
/// string and returns its Pfaffian.  Pairs sharing a time argument use the
/// equal-time frame; moved x static pairs use the time-t frame.
inline Complex wick_pfaffian(const std::vector<WickOp>& ops, const ContractionFrame& at_t,
                             const ContractionFrame& at_0, Eigen::MatrixXcd& scratch) {
    const int dim = static_cast<int>(ops.size());
    if (scratch.rows() < dim || scratch.cols() < dim) scratch.resize(dim, dim);
    auto block = scratch.topLeftCorner(dim, dim);
    for (int a = 0; a < dim; ++a) {
        block(a, a) = Complex(0.0, 0.0);
        for (int b = a + 1; b < dim; ++b) {
            const bool mixed = ops[a].moved && !ops[b].moved;
            const ContractionFrame& f = mixed ? at_t : at_0;
            const Complex v = pick(f, ops[a].plus, ops[b].plus)(ops[a].site - 1, ops[b].site - 1);
            block(a, b) = v;
            block(b, a) = -v;
        }
    }
    return pfaffian_destructive(block);
}

} // namespace detail

/// <sigma_j^x(t) sigma_{j+n}^x> for one pair via the Wick Pfaffian.  The n = 0
/// autocorrelation goes through the same construction; it equals 1 only at
/// t = 0.
inline Complex xx_correlation(int j, int n, double t, const ContractionTable& table) {
    if (n < 0) throw std::invalid_argument("xx_correlation: separation must be >= 0");
    if (j < 1 || j + n > table.n_sites())
        throw std::out_of_range("xx_correlation: pair (" + std::to_string(j) + "," +
                                std::to_string(j + n) + ") outside chain of N=" +
                                std::to_string(table.n_sites()));
    if (n == 0 && t == 0.0) return Complex(1.0, 0.0);
    std::vector<detail::WickOp> ops;
    detail::build_ops(j, n, ops);
    Eigen::MatrixXcd scratch;
    const ContractionFrame at_t = table.frame(t);
    return detail::wick_pfaffian(ops, at_t, table.equal_time(), scratch);
}

/// Ground-state two-point function sampled on a uniform time grid.
/// anchor = 0 tags the exact pair average over all sites.
struct CorrelationSeries {
    Channel channel = Channel::XX;
    int separation = 0;
    int anchor = 0;
    TimeGrid grid;
    std::vector<Complex> values;
};

/// How the site pair realizing separation n is chosen.
///   Averaged: C_n = (1/N) sum_j <sigma_j^x(t) sigma_{j+n}^x>, the exact
///             content of the (1/N) sum_{j,j'} identities behind the DSF;
///   Centered: single pair placed mid-chain, j = floor((N-n)/2) + 1;
///   Fixed:    user-supplied anchor site.
struct AnchorPolicy {
    enum class Mode { Averaged, Centered, Fixed };
    Mode mode = Mode::Centered;
    int site = 1; // Fixed only

    static AnchorPolicy averaged() { return {Mode::Averaged, 0}; }
    static AnchorPolicy centered() { return {Mode::Centered, 0}; }
    static AnchorPolicy fixed(int j) { return {Mode::Fixed, j}; }

    int anchor_for(int n, int n_sites) const {
        switch (mode) {
            case Mode::Averaged: return 0;
            case Mode::Centered: return (n_sites - n) / 2 + 1;
            default: return site;
        }
    }
};

/// Time derivatives of the xx series give the remaining channels:
///   xy = (1/2 Omega) d/dt xx,  yx = -xy,  yy = -(1/2 Omega)^2 d^2/dt^2 xx.
/// Derivatives are 4th-order central differences with matching-order
/// one-sided stencils at the grid ends; needs at least 7 samples.
struct DerivedChannels {
    CorrelationSeries xy, yx, yy;
};

inline DerivedChannels derive_xy_yy(const CorrelationSeries& xx, double field) {
    const int m = static_cast<int>(xx.values.size());
    if (m < 7) throw std::invalid_argument("derive_xy_yy: need at least 7 grid points, got " +
                                           std::to_string(m));
    if (!(field > 0.0)) throw std::invalid_argument("derive_xy_yy: field must be > 0");
    const double dt = xx.grid.dt;
    const auto& f = xx.values;

    auto d1 = [&](int i) -> Complex {
        if (i >= 2 && i + 2 < m)
            return (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dt);
        if (i == 0)
            return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) /
                   (12.0 * dt);
        if (i == 1)
            return (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * dt);
        if (i == m - 2)
            return -(-3.0 * f[m - 1] - 10.0 * f[m - 2] + 18.0 * f[m - 3] - 6.0 * f[m - 4] +
                     f[m - 5]) /
                   (12.0 * dt);
        return -(-25.0 * f[m - 1] + 48.0 * f[m - 2] - 36.0 * f[m - 3] + 16.0 * f[m - 4] -
                 3.0 * f[m - 5]) /
               (12.0 * dt);
    };
    auto d2 = [&](int i) -> Complex {
        if (i >= 2 && i + 2 < m)
            return (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) /
                   (12.0 * dt * dt);
        if (i == 0)
            return (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] -
                    10.0 * f[5]) /
                   (12.0 * dt * dt);
        if (i == 1)
            return (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) /
                   (12.0 * dt * dt);
        if (i == m - 2)
            return (10.0 * f[m - 1] - 15.0 * f[m - 2] - 4.0 * f[m - 3] + 14.0 * f[m - 4] -
                    6.0 * f[m - 5] + f[m - 6]) /
                   (12.0 * dt * dt);
        return (45.0 * f[m - 1] - 154.0 * f[m - 2] + 214.0 * f[m - 3] - 156.0 * f[m - 4] +
                61.0 * f[m - 5] - 10.0 * f[m - 6]) /
               (12.0 * dt * dt);
    };

    DerivedChannels out;
    out.xy = {Channel::XY, xx.separation, xx.anchor, xx.grid, {}};
    out.yx = {Channel::YX, xx.separation, xx.anchor, xx.grid, {}};
    out.yy = {Channel::YY, xx.separation, xx.anchor, xx.grid, {}};
    out.xy.values.resize(f.size());
    out.yx.values.resize(f.size());
    out.yy.values.resize(f.size());
    const double inv2w = 1.0 / (2.0 * field);
    for (int i = 0; i < m; ++i) {
        const Complex first = d1(i) * inv2w;
        out.xy.values[i] = first;
        out.yx.values[i] = -first;
        out.yy.values[i] = -d2(i) * inv2w * inv2w;
    }
    return out;
}

/// All four channels for every requested separation.
class CorrelationSet {
public:
    struct Entry {
        CorrelationSeries xx, xy, yx, yy;
    };

    const CorrelationSeries& series(Channel ch, int n) const {
        const auto it = entries_.find(std::abs(n));
        if (it == entries_.end())
            throw std::out_of_range("CorrelationSet: separation n=" + std::to_string(n) +
                                    " not computed");
        // +-n give identical series: the xx amplitudes are real and symmetric
        // under swapping the pair, and xy/yx/yy are derived from xx per pair.
        switch (ch) {
            case Channel::XX: return it->second.xx;
            case Channel::XY: return it->second.xy;
            case Channel::YX: return it->second.yx;
            default: return it->second.yy;
        }
    }

    bool has(int n) const { return entries_.count(std::abs(n)) > 0; }
    int max_separation() const { return entries_.empty() ? -1 : entries_.rbegin()->first; }
    const TimeGrid& grid() const { return grid_; }
    const ChainSpec& chain() const { return spec_; }

    void insert(int n, Entry e) { entries_[n] = std::move(e); }
    void set_context(ChainSpec spec, TimeGrid grid) {
        spec_ = spec;
        grid_ = grid;
    }

private:
    std::map<int, Entry> entries_;
    ChainSpec spec_;
    TimeGrid grid_;
};

/// Batch driver: xx for every (n, t) via shared per-time contraction frames,
/// then the derived channels.  Work is split over time-chunks; results land in
/// indexed slots so the output is independent of the thread count.
inline CorrelationSet correlation_sweep(const ChainSpec& spec, const AnchorPolicy& policy,
                                        const std::vector<int>& n_list, const TimeGrid& grid,
                                        int threads = 0) {
    spec.validate();
    grid.validate();
    if (spec.boundary != Boundary::Open)
        throw std::invalid_argument("correlation_sweep: open boundary required");
    const int n_sites = spec.n_sites;

    const ContractionTable table{open_spectrum(spec)};

    // (j, n) pairs to evaluate, and how each series folds them in
    struct Job {
        int j, n;
        double weight;
        std::size_t series_index;
    };
    std::vector<int> wanted;
    for (int n : n_list) {
        if (n < 0) throw std::invalid_argument("correlation_sweep: separations must be >= 0");
        if (n >= n_sites)
            throw std::out_of_range("correlation_sweep: separation n=" + std::to_string(n) +
                                    " too large for N=" + std::to_string(n_sites));
        wanted.push_back(n);
    }
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

    std::vector<Job> jobs;
    for (std::size_t s = 0; s < wanted.size(); ++s) {
        const int n = wanted[s];
        if (policy.mode == AnchorPolicy::Mode::Averaged) {
            const double w = 1.0 / n_sites;
            for (int j = 1; j + n <= n_sites; ++j) jobs.push_back({j, n, w, s});
        } else {
            const int j = policy.anchor_for(n, n_sites);
            if (j < 1 || j + n > n_sites)
                throw std::out_of_range("correlation_sweep: anchor " + std::to_string(j) +
                                        " invalid for separation " + std::to_string(n));
            jobs.push_back({j, n, 1.0, s});
        }
    }

    // accumulator per series per time point
    std::vector<std::vector<Complex>> acc(wanted.size(),
                                          std::vector<Complex>(grid.count, Complex(0, 0)));

    // chunk the time axis; each chunk builds its frames once and owns scratch
    const int chunk = 32;
    const int n_chunks = (grid.count + chunk - 1) / chunk;
    std::vector<std::vector<std::vector<Complex>>> partial(
        static_cast<std::size_t>(n_chunks));

    parallel_for(static_cast<std::size_t>(n_chunks), threads, [&](std::size_t ci) {
        const int t0 = static_cast<int>(ci) * chunk;
        const int t1 = std::min(grid.count, t0 + chunk);
        auto& local = partial[ci];
        local.assign(wanted.size(), std::vector<Complex>(t1 - t0, Complex(0, 0)));
        Eigen::MatrixXcd scratch;
        std::vector<detail::WickOp> ops;
        for (int ti = t0; ti < t1; ++ti) {
            const ContractionFrame at_t = table.frame(grid.t(ti));
            for (const Job& job : jobs) {
                detail::build_ops(job.j, job.n, ops);
                const Complex v =
                    detail::wick_pfaffian(ops, at_t, table.equal_time(), scratch);
                local[job.series_index][ti - t0] += job.weight * v;
            }
        }
    });
    for (int ci = 0; ci < n_chunks; ++ci) {
        const int t0 = ci * chunk;
        for (std::size_t s = 0; s < wanted.size(); ++s)
            for (std::size_t i = 0; i < partial[ci][s].size(); ++i)
                acc[s][t0 + static_cast<int>(i)] = partial[ci][s][i];
    }

    CorrelationSet out;
    out.set_context(spec, grid);
    for (std::size_t s = 0; s < wanted.size(); ++s) {
        const int n = wanted[s];
        CorrelationSeries xx{Channel::XX, n, policy.anchor_for(n, n_sites), grid, {}};
        xx.values = std::move(acc[s]);
        DerivedChannels d = derive_xy_yy(xx, spec.field);
        CorrelationSet::Entry e{std::move(xx), std::move(d.xy), std::move(d.yx), std::move(d.yy)};
        out.insert(n, std::move(e));
    }
    return out;
}

/// Separations 0..n_max (n_max < 0 means all of 0..N-1).
inline std::vector<int> all_separations(int n_sites, int n_max = -1) {
    if (n_max < 0 || n_max > n_sites - 1) n_max = n_sites - 1;
    std::vector<int> out;
    for (int n = 0; n <= n_max; ++n) out.push_back(n);
    return out;
}

} // namespace spinbus

#endif // SPINBUS_CORRELATION_HPP
