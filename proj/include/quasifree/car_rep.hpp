#pragma once

#include "quasifree/covariance.hpp"
#include "quasifree/numerics.hpp"

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace quasifree {

/// Coordinates of a vector of H relative to a Gamma-adapted frame:
/// xi = sum_i x_i eps_i + sum_i y_i Gamma eps_i + x0 eps_0 (x0 unused for even
/// parity). In these coordinates Gamma acts as (x, y, x0) -> (conj y, conj x,
/// conj x0) and the generator map is b(xi) = sum x_i b_i + sum y_i b_i^* + x0 b_0.
struct FrameVector {
    Vector x;
    Vector y;
    Complex x0 = 0.0;

    FrameVector() = default;
    FrameVector(Vector x_, Vector y_, Complex x0_ = 0.0)
        : x(std::move(x_)), y(std::move(y_)), x0(x0_) {}

    static FrameVector zero(Index n) { return {Vector::Zero(n), Vector::Zero(n), 0.0}; }

    FrameVector conjugated() const { return {y.conjugate(), x.conjugate(), std::conj(x0)}; }

    /// Inner product induced by orthonormality of the frame, linear in *this.
    Complex dot(const FrameVector& other) const {
        return inner(x, other.x) + inner(y, other.y) + x0 * std::conj(other.x0);
    }

    /// Concrete vector of C^k relative to the given frame.
    Vector ambient(const GammaAdaptedBasis& frame) const {
        if (x.size() != frame.n() || y.size() != frame.n())
            throw validation_error("frame vector does not match the frame's mode count");
        Vector v = Vector::Zero(frame.dim());
        for (Index i = 0; i < frame.n(); ++i) {
            v += x[i] * frame.epsilons.col(i);
            v += y[i] * frame.gamma.apply(frame.epsilons.col(i));
        }
        if (frame.parity == Parity::odd)
            v += x0 * (*frame.zero_vector);
        else if (x0 != 0.0)
            throw validation_error("zero-mode coordinate on an even-parity frame");
        return v;
    }
};

/// Orthonormal expansion of an ambient vector over an adapted frame.
inline FrameVector frame_coordinates(const GammaAdaptedBasis& frame, const Vector& xi) {
    if (xi.size() != frame.dim())
        throw validation_error("frame_coordinates: vector dimension does not match the frame");
    FrameVector v = FrameVector::zero(frame.n());
    for (Index i = 0; i < frame.n(); ++i) {
        v.x[i] = inner(xi, frame.epsilons.col(i));
        v.y[i] = inner(xi, frame.gamma.apply(frame.epsilons.col(i)));
    }
    if (frame.parity == Parity::odd) v.x0 = inner(xi, *frame.zero_vector);
    return v;
}

/// Jordan-Wigner representation of the self-dual CAR algebra on n modes.
/// Even parity: b_i = Z^(i-1) (x) [[0,0],[1,0]] (x) I^(n-i) on (C^2)^n.
/// Odd parity appends a diagonal 2-dim factor: generators pick up (x) I and a
/// zero mode b_0 = 2^{-1/2} Z^n (x) Z appears; algebra elements are the
/// matrices commuting with I^n (x) Z.
struct JordanWignerRep {
    int n = 0;
    Parity parity = Parity::even;
    std::vector<Matrix> generators;   // b(eps_i), i = 1..n
    std::optional<Matrix> zero_mode;  // b(eps_0), odd parity only
    Index rep_dim = 0;

    Index k() const { return 2 * n + (parity == Parity::odd ? 1 : 0); }
};

using RepPtr = std::shared_ptr<const JordanWignerRep>;

inline RepPtr build_rep(int n, Parity parity, Index max_rep_dim = Index(1) << 13) {
    if (n < 0 || (parity == Parity::even && n < 1))
        throw validation_error("build_rep: need n >= 1 modes (n >= 0 for odd parity)");
    const int qubits = n + (parity == Parity::odd ? 1 : 0);
    if (qubits >= 48 || (Index(1) << qubits) > max_rep_dim)
        throw resource_error("build_rep: representation dimension 2^" + std::to_string(qubits) +
                             " exceeds the cap");
    auto rep = std::make_shared<JordanWignerRep>();
    rep->n = n;
    rep->parity = parity;
    rep->rep_dim = Index(1) << qubits;

    Matrix z(2, 2), lower(2, 2), id2 = Matrix::Identity(2, 2);
    z << 1, 0, 0, -1;
    lower << 0, 0, 1, 0;

    for (int i = 1; i <= n; ++i) {
        Matrix m = Matrix::Identity(1, 1);
        for (int j = 1; j < i; ++j) m = kron(m, z);
        m = kron(m, lower);
        for (int j = i; j < n; ++j) m = kron(m, id2);
        if (parity == Parity::odd) m = kron(m, id2);
        rep->generators.push_back(std::move(m));
    }
    if (parity == Parity::odd) {
        Matrix m = Matrix::Identity(1, 1);
        for (int j = 0; j < n; ++j) m = kron(m, z);
        m = kron(m, z);
        rep->zero_mode = m / std::sqrt(2.0);
    }
    return rep;
}

/// b(xi) for xi given in frame coordinates.
inline Matrix generator(const JordanWignerRep& rep, const FrameVector& xi) {
    if (xi.x.size() != rep.n || xi.y.size() != rep.n)
        throw validation_error("generator: coordinate count does not match the mode count");
    Matrix m = Matrix::Zero(rep.rep_dim, rep.rep_dim);
    for (int i = 0; i < rep.n; ++i) {
        m += xi.x[i] * rep.generators[i];
        m += xi.y[i] * rep.generators[i].adjoint();
    }
    if (rep.parity == Parity::odd)
        m += xi.x0 * (*rep.zero_mode);
    else if (xi.x0 != 0.0)
        throw validation_error("generator: zero-mode coordinate on an even-parity representation");
    return m;
}

/// An element of the represented algebra. Odd-parity membership (commuting
/// with I^n (x) Z) is checked where it matters, not on construction.
struct AlgebraElement {
    RepPtr rep;
    Matrix matrix;
};

struct CarReport {
    double max_anticommutator_residual = 0;  // |b(xi) b(eta)^* + b(eta)^* b(xi) - (xi,eta) 1|
    double max_adjoint_residual = 0;         // |b(Gamma xi) - b(xi)^*|
    double tolerance = 0;
    int pairs_checked = 0;
    bool passed = false;
};

/// Exhaustively checks the CAR on all frame-basis pairs plus `trials` random
/// coordinate pairs. Tolerance is 1e-12 * rep_dim.
inline CarReport verify_car(const JordanWignerRep& rep, int trials = 25,
                            std::uint64_t seed = 1) {
    CarReport report;
    report.tolerance = 1e-12 * static_cast<double>(rep.rep_dim);
    const Matrix id = Matrix::Identity(rep.rep_dim, rep.rep_dim);

    std::vector<FrameVector> vectors;
    for (int i = 0; i < rep.n; ++i) {
        FrameVector e = FrameVector::zero(rep.n), ge = FrameVector::zero(rep.n);
        e.x[i] = 1.0;
        ge.y[i] = 1.0;
        vectors.push_back(e);
        vectors.push_back(ge);
    }
    if (rep.parity == Parity::odd) {
        FrameVector e0 = FrameVector::zero(rep.n);
        e0.x0 = 1.0;
        vectors.push_back(e0);
    }
    const auto check_pair = [&](const FrameVector& xi, const FrameVector& eta) {
        const Matrix bx = generator(rep, xi);
        const Matrix be = generator(rep, eta);
        const Matrix anti = bx * be.adjoint() + be.adjoint() * bx - xi.dot(eta) * id;
        report.max_anticommutator_residual =
            std::max(report.max_anticommutator_residual, max_abs(anti));
        report.max_adjoint_residual = std::max(
            report.max_adjoint_residual, max_abs(Matrix(generator(rep, xi.conjugated()) - bx.adjoint())));
        ++report.pairs_checked;
    };

    for (const auto& a : vectors)
        for (const auto& b : vectors) check_pair(a, b);

    Rng rng(seed);
    const auto random_vector = [&] {
        return FrameVector(rng.vector(rep.n), rng.vector(rep.n),
                           rep.parity == Parity::odd ? rng.cgaussian() : Complex(0.0));
    };
    for (int t = 0; t < trials; ++t) check_pair(random_vector(), random_vector());

    report.passed = report.max_anticommutator_residual <= report.tolerance &&
                    report.max_adjoint_residual <= report.tolerance;
    return report;
}

/// One basis monomial c_{j1} ... c_{jr}, j1 < ... < jr, of the Majorana basis.
/// vectors holds the Gamma-fixed frame coordinates v with b(v) = c_j for each
/// factor: eps_i + Gamma eps_i, i(eps_i - Gamma eps_i), sqrt(2) eps_0.
struct MajoranaMonomial {
    std::vector<int> index_set;  // labels: 0 for c_0 (odd parity), then 2i-1, 2i per mode i
    Matrix matrix;
    std::vector<FrameVector> vectors;
};

/// Majorana operators by label, plus their defining frame vectors.
inline std::vector<std::pair<int, Matrix>> majorana_ops(const JordanWignerRep& rep) {
    std::vector<std::pair<int, Matrix>> out;
    if (rep.parity == Parity::odd)
        out.emplace_back(0, std::sqrt(2.0) * (*rep.zero_mode));
    for (int i = 1; i <= rep.n; ++i) {
        const Matrix& b = rep.generators[i - 1];
        out.emplace_back(2 * i - 1, Matrix(b + b.adjoint()));
        out.emplace_back(2 * i, Matrix(Complex(0, 1) * (b - b.adjoint())));
    }
    return out;
}

inline FrameVector majorana_frame_vector(int n, Parity parity, int label) {
    FrameVector v = FrameVector::zero(n);
    if (label == 0) {
        if (parity != Parity::odd)
            throw validation_error("majorana_frame_vector: label 0 requires odd parity");
        v.x0 = std::sqrt(2.0);
        return v;
    }
    const int mode = (label + 1) / 2;  // labels 2i-1, 2i -> mode i
    if (mode < 1 || mode > n)
        throw validation_error("majorana_frame_vector: label out of range");
    if (label % 2 == 1) {
        v.x[mode - 1] = 1.0;
        v.y[mode - 1] = 1.0;
    } else {
        v.x[mode - 1] = Complex(0, 1);
        v.y[mode - 1] = Complex(0, -1);
    }
    return v;
}

inline FrameVector majorana_vector(const JordanWignerRep& rep, int label) {
    return majorana_frame_vector(rep.n, rep.parity, label);
}

/// All 2^m products of distinct Majoranas in increasing label order, including
/// the empty product. Enumerated by label bitmask, so the order is stable.
inline std::vector<MajoranaMonomial> majorana_basis(const JordanWignerRep& rep,
                                                    std::size_t max_bytes = std::size_t(64) << 20) {
    const auto ops = majorana_ops(rep);
    const std::size_t m = ops.size();
    const std::size_t count = std::size_t(1) << m;
    const std::size_t bytes = count * static_cast<std::size_t>(rep.rep_dim) *
                              static_cast<std::size_t>(rep.rep_dim) * sizeof(Complex);
    if (m >= 24 || bytes > max_bytes)
        throw resource_error("majorana_basis: " + std::to_string(count) +
                             " monomials exceed the size cap");

    std::vector<MajoranaMonomial> out;
    out.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        MajoranaMonomial mono;
        mono.matrix = Matrix::Identity(rep.rep_dim, rep.rep_dim);
        for (std::size_t j = 0; j < m; ++j) {
            if (mask & (std::size_t(1) << j)) {
                mono.index_set.push_back(ops[j].first);
                mono.matrix = mono.matrix * ops[j].second;
                mono.vectors.push_back(majorana_vector(rep, ops[j].first));
            }
        }
        out.push_back(std::move(mono));
    }
    return out;
}

/// max |A P - P A| with P = I^n (x) Z; zero exactly for odd-parity members.
inline double odd_membership_residual(const JordanWignerRep& rep, const Matrix& a) {
    if (rep.parity != Parity::odd)
        throw validation_error("odd_membership_residual: even-parity representation");
    Matrix p = Matrix::Identity(rep.rep_dim / 2, rep.rep_dim / 2);
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    p = kron(p, z);
    return max_abs(a * p - p * a);
}

/// Coefficients of A over the Majorana basis: gamma_I = tau(m_I^* A) with
/// tau = trace / rep_dim. For odd parity the element must commute with
/// I^n (x) Z within 1e-10 (relative to its largest entry).
inline std::map<std::vector<int>, Complex> expand(const AlgebraElement& a) {
    const JordanWignerRep& rep = *a.rep;
    if (a.matrix.rows() != rep.rep_dim || a.matrix.cols() != rep.rep_dim)
        throw validation_error("expand: element dimension does not match the representation");
    if (rep.parity == Parity::odd) {
        const double res = odd_membership_residual(rep, a.matrix);
        if (res > 1e-10 * std::max(1.0, max_abs(a.matrix)))
            throw validation_error("expand: element is not a member of the odd-parity algebra "
                                   "(grading commutator residual " + std::to_string(res) + ")");
    }
    std::map<std::vector<int>, Complex> coeffs;
    for (const auto& mono : majorana_basis(rep)) {
        const Complex c = (mono.matrix.adjoint() * a.matrix).trace() /
                          static_cast<double>(rep.rep_dim);
        coeffs[mono.index_set] = c;
    }
    return coeffs;
}

/// Inverse of expand: sum of gamma_I m_I.
inline Matrix reconstruct(const JordanWignerRep& rep,
                          const std::map<std::vector<int>, Complex>& coeffs) {
    Matrix out = Matrix::Zero(rep.rep_dim, rep.rep_dim);
    for (const auto& mono : majorana_basis(rep)) {
        const auto it = coeffs.find(mono.index_set);
        if (it != coeffs.end()) out += it->second * mono.matrix;
    }
    return out;
}

}  // namespace quasifree
