#ifndef SPINBUS_PFAFFIAN_HPP
#define SPINBUS_PFAFFIAN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinbus {

using Complex = std::complex<double>;

/// Even-dimensional complex antisymmetric matrix, the Pfaffian operand.
/// Antisymmetry is checked on construction (tolerance 1e-13 on |x_ab + x_ba|)
/// and the stored lower triangle is mirrored from the upper one, so downstream
/// kernels may rely on exact skewness.
class SkewMatrix {
public:
    explicit SkewMatrix(Eigen::MatrixXcd m) {
        if (m.rows() != m.cols())
            throw std::invalid_argument("SkewMatrix: matrix must be square");
        if (m.rows() % 2 != 0)
            throw std::invalid_argument("SkewMatrix: dimension must be even, got " +
                                        std::to_string(m.rows()));
        for (Eigen::Index a = 0; a < m.rows(); ++a)
            for (Eigen::Index b = a; b < m.cols(); ++b)
                if (std::abs(m(a, b) + m(b, a)) > 1e-13)
                    throw std::invalid_argument("SkewMatrix: antisymmetry violated at (" +
                                                std::to_string(a) + "," + std::to_string(b) + ")");
        // mirror so that skewness holds exactly
        for (Eigen::Index a = 0; a < m.rows(); ++a) {
            m(a, a) = Complex(0.0, 0.0);
            for (Eigen::Index b = a + 1; b < m.cols(); ++b) m(b, a) = -m(a, b);
        }
        m_ = std::move(m);
    }

    Eigen::Index dim() const { return m_.rows(); }
    const Eigen::MatrixXcd& matrix() const { return m_; }

private:
    Eigen::MatrixXcd m_;
};

namespace detail {

// Relative threshold below which a pivot declares the matrix singular.
inline constexpr double kPivotRelTol = 1e-14;

} // namespace detail

/// Pfaffian by pivoted 2x2 block Schur-complement elimination, in place.
///
/// Each step searches the active submatrix for the entry of largest magnitude,
/// permutes its index pair to the leading positions (tracking the permutation
/// parity, which flips the Pfaffian sign per transposition), records the x_12
/// factor and forms the antisymmetric Schur complement C + B^T A^{-1} B on the
/// trailing block.  The scratch argument is destroyed.  Returns exactly 0 when
/// no pivot exceeds 1e-14 times the largest magnitude of the input.
inline Complex pfaffian_destructive(Eigen::Ref<Eigen::MatrixXcd> x) {
    const Eigen::Index n = x.rows();
    if (n != x.cols()) throw std::invalid_argument("pfaffian: matrix must be square");
    if (n % 2 != 0) throw std::invalid_argument("pfaffian: dimension must be even");
    if (n == 0) return Complex(1.0, 0.0);

    double scale = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) scale = std::max(scale, std::abs(x(a, b)));
    if (scale == 0.0) return Complex(0.0, 0.0);
    const double tol = detail::kPivotRelTol * scale;

    Complex pf(1.0, 0.0);
    double sign = 1.0;
    for (Eigen::Index s = 0; s < n; s += 2) {
        // full pivot search over the active submatrix
        Eigen::Index pa = s, pb = s + 1;
        double best = 0.0;
        for (Eigen::Index a = s; a < n; ++a)
            for (Eigen::Index b = a + 1; b < n; ++b) {
                const double mag = std::abs(x(a, b));
                if (mag > best) {
                    best = mag;
                    pa = a;
                    pb = b;
                }
            }
        if (best < tol) return Complex(0.0, 0.0);

        if (pa != s) {
            x.row(pa).swap(x.row(s));
            x.col(pa).swap(x.col(s));
            sign = -sign;
        }
        if (pb == s) pb = pa; // pivot row moved by the first swap
        if (pb != s + 1) {
            x.row(pb).swap(x.row(s + 1));
            x.col(pb).swap(x.col(s + 1));
            sign = -sign;
        }

        const Complex piv = x(s, s + 1);
        pf *= piv;
        // Schur complement on the trailing block:
        // C_ij += (x_{s+1,i} x_{s,j} - x_{s,i} x_{s+1,j}) / piv
        for (Eigen::Index i = s + 2; i < n; ++i) {
            const Complex ui = x(s, i) / piv;
            const Complex vi = x(s + 1, i);
            if (ui == Complex(0.0, 0.0) && vi == Complex(0.0, 0.0)) continue;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const Complex upd = vi * x(s, j) / piv - ui * x(s + 1, j);
                x(i, j) += upd;
                x(j, i) -= upd;
            }
        }
    }
    return sign * pf;
}

/// Pfaffian of a validated SkewMatrix (copies into scratch storage).
inline Complex pfaffian_fast(const SkewMatrix& x) {
    Eigen::MatrixXcd scratch = x.matrix();
    return pfaffian_destructive(scratch);
}

/// Reference Pfaffian by recursive expansion along the first row,
///   Pf(X) = sum_{b>1} (-1)^b x_{1b} Pf(X with rows/cols 1,b removed).
/// Factorial cost; refused above dim 12.
inline Complex pfaffian_reference(const SkewMatrix& x) {
    if (x.dim() > 12)
        throw std::invalid_argument("pfaffian_reference: dim " + std::to_string(x.dim()) +
                                    " exceeds the cost guard (12)");
    struct Rec {
        static Complex run(const Eigen::MatrixXcd& m, std::vector<Eigen::Index>& idx) {
            const std::size_t k = idx.size();
            if (k == 0) return Complex(1.0, 0.0);
            if (k == 2) return m(idx[0], idx[1]);
            Complex acc(0.0, 0.0);
            const Eigen::Index first = idx[0];
            double sgn = 1.0; // (-1)^b with b = 2, 3, ... over remaining partners
            for (std::size_t b = 1; b < k; ++b) {
                const Complex head = m(first, idx[b]);
                if (head != Complex(0.0, 0.0)) {
                    std::vector<Eigen::Index> rest;
                    rest.reserve(k - 2);
                    for (std::size_t i = 1; i < k; ++i)
                        if (i != b) rest.push_back(idx[i]);
                    acc += sgn * head * run(m, rest);
                }
                sgn = -sgn;
            }
            return acc;
        }
    };
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.dim()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
    return Rec::run(x.matrix(), idx);
}

/// One elimination step for a chosen pivot pair (a, b), a < b: returns the
/// signed x_12 factor (parity of moving the pair to the front included) and
/// the (dim-2)-dimensional antisymmetric Schur complement.  Exposed for tests.
inline std::pair<Complex, SkewMatrix> schur_step(const SkewMatrix& x, Eigen::Index a,
                                                 Eigen::Index b) {
    if (a == b || a < 0 || b < 0 || a >= x.dim() || b >= x.dim())
        throw std::invalid_argument("schur_step: invalid pivot pair");
    if (a > b) std::swap(a, b);

    Eigen::MatrixXcd m = x.matrix();
    double scale = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) scale = std::max(scale, std::abs(m(i, j)));
    if (std::abs(m(a, b)) < detail::kPivotRelTol * std::max(scale, 1e-300))
        throw std::invalid_argument("schur_step: pivot below singularity threshold");

    double sign = 1.0;
    if (a != 0) {
        m.row(a).swap(m.row(0));
        m.col(a).swap(m.col(0));
        sign = -sign;
    }
    if (b == 0) b = a;
    if (b != 1) {
        m.row(b).swap(m.row(1));
        m.col(b).swap(m.col(1));
        sign = -sign;
    }

    const Complex piv = m(0, 1);
    const Eigen::Index r = m.rows() - 2;
    Eigen::MatrixXcd out(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        out(i, i) = Complex(0.0, 0.0);
        for (Eigen::Index j = i + 1; j < r; ++j) {
            const Complex upd =
                m(1, i + 2) * m(0, j + 2) / piv - m(0, i + 2) / piv * m(1, j + 2);
            out(i, j) = m(i + 2, j + 2) + upd;
            out(j, i) = -out(i, j);
        }
    }
    return {sign * piv, SkewMatrix(std::move(out))};
}

} // namespace spinbus

#endif // SPINBUS_PFAFFIAN_HPP
