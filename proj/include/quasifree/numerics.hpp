#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace quasifree {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Input fails a mathematical precondition (shape, Hermiticity, spectrum, ...).
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested computation exceeds a hard size cap.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Caller must use a different operation (e.g. non-commuting input to an
/// analytic decision that only covers commuting pairs).
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A structural invariant that should hold by construction failed numerically.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// Dimension-scaled tolerance for Hermiticity checks and eigenvalue grouping.
inline double scaled_tol(Index k) { return 1e-9 * static_cast<double>(k); }

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// max |M - M^*| over entries; 0 for exactly Hermitian input.
inline double hermiticity_residual(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

/// Inner product, linear in the first argument: (x, y) = sum_i x_i conj(y_i).
inline Complex inner(const Vector& x, const Vector& y) { return y.dot(x); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

struct EigenDecomposition {
    RealVector values;  // ascending
    Matrix vectors;     // orthonormal columns, phase-fixed
};

/// Hermitian eigendecomposition. Throws validation_error when the input is not
/// square or its Hermiticity residual exceeds scaled_tol(k). Eigenvalues come
/// back ascending; each eigenvector is rotated so its largest-magnitude entry
/// (lowest index on near-ties) is real and positive, which makes repeated runs
/// on identical input byte-stable.
inline EigenDecomposition herm_eig(const Matrix& m) {
    if (m.rows() != m.cols())
        throw validation_error("herm_eig: matrix is " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()) + ", expected square");
    const double residual = hermiticity_residual(m);
    const double tol = scaled_tol(m.rows());
    if (residual > tol) {
        std::ostringstream msg;
        msg << "herm_eig: max asymmetry |M - M^*| = " << residual << " exceeds tolerance " << tol;
        throw validation_error(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()));
    if (solver.info() != Eigen::Success)
        throw internal_error("herm_eig: eigensolver failed to converge");
    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    for (Index j = 0; j < out.vectors.cols(); ++j) {
        Index pick = 0;
        double best = 0.0;
        for (Index i = 0; i < out.vectors.rows(); ++i) {
            const double a = std::abs(out.vectors(i, j));
            if (a > best * (1.0 + 1e-12)) {
                best = a;
                pick = i;
            }
        }
        const Complex lead = out.vectors(pick, j);
        if (std::abs(lead) > 0)
            out.vectors.col(j) *= std::conj(lead) / std::abs(lead);
    }
    return out;
}

/// Splits ascending eigenvalues into blocks of near-equal values: a new block
/// starts whenever the gap to the previous value exceeds tol.
inline std::vector<std::pair<Index, Index>> group_eigenvalues(const RealVector& values, double tol) {
    std::vector<std::pair<Index, Index>> blocks;
    Index begin = 0;
    for (Index i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i] - values[i - 1] > tol) {
            blocks.emplace_back(begin, i);
            begin = i;
        }
    }
    return blocks;
}

/// splitmix64 step; used to derive independent per-trial seeds from a campaign
/// seed so results do not depend on scheduling.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(seed ^ mix_seed(a ^ mix_seed(b)));
}

/// Deterministic random source. Gaussians use an explicit Box-Muller transform
/// instead of std::normal_distribution so the stream is fully specified by the
/// seed, independent of the standard library build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Complex cgaussian() { return {gaussian(), gaussian()}; }

    Vector vector(Index k) {
        Vector v(k);
        for (Index i = 0; i < k; ++i) v[i] = cgaussian();
        return v;
    }

    Matrix matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = cgaussian();
        return m;
    }

    Matrix hermitian(Index k) {
        Matrix a = matrix(k, k);
        return 0.5 * (a + a.adjoint());
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace quasifree
