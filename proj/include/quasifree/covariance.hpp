#pragma once

#include "quasifree/numerics.hpp"

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace quasifree {

enum class Parity { even, odd };

/// Anti-unitary involution Gamma on C^k, stored as a unitary matrix G with the
/// action xi -> G * conj(xi). Involutivity forces G * conj(G) = I, which
/// together with unitarity makes G symmetric.
class Involution {
public:
    /// Validates G * conj(G) = I and G^* G = I within tol before accepting.
    static Involution validated(Matrix g, double tol = 1e-10) {
        if (g.rows() != g.cols() || g.rows() < 1)
            throw validation_error("involution: matrix must be square and non-empty");
        const Matrix id = Matrix::Identity(g.rows(), g.cols());
        const double inv_res = max_abs(g * g.conjugate() - id);
        const double uni_res = max_abs(g.adjoint() * g - id);
        if (inv_res > tol || uni_res > tol) {
            std::ostringstream msg;
            msg << "involution: residuals |G conj(G) - I| = " << inv_res << ", |G*G - I| = "
                << uni_res << " exceed tolerance " << tol;
            throw validation_error(msg.str());
        }
        return Involution(std::move(g));
    }

    /// Standard involution: conjugation composed with the permutation that
    /// swaps e_{2i} <-> e_{2i+1} and fixes the last vector when k is odd.
    static Involution standard(Index k) {
        Matrix g = Matrix::Zero(k, k);
        for (Index i = 0; i + 1 < k; i += 2) {
            g(i, i + 1) = 1;
            g(i + 1, i) = 1;
        }
        if (k % 2 == 1) g(k - 1, k - 1) = 1;
        return Involution(std::move(g));
    }

    Index dim() const { return g_.rows(); }
    const Matrix& matrix() const { return g_; }

    /// Gamma xi
    Vector apply(const Vector& xi) const { return g_ * xi.conjugate(); }

    /// Matrix of the linear map Gamma M Gamma.
    Matrix conjugate_map(const Matrix& m) const { return g_ * m.conjugate() * g_.adjoint(); }

private:
    explicit Involution(Matrix g) : g_(std::move(g)) {}
    Matrix g_;
};

/// Residual report for the covariance-operator conditions.
struct CovarianceCheck {
    double hermiticity = 0;      // max |S - S^*|
    double spectrum_low = 0;     // min eigenvalue
    double spectrum_high = 0;    // max eigenvalue
    double gamma_residual = 0;   // max |G conj(S) G^* - (I - S)|
    double herm_tol = 0;
    double spectrum_tol = 0;
    double gamma_tol = 0;
    bool hermitian_ok = false;
    bool spectrum_ok = false;
    bool gamma_ok = false;

    bool ok() const { return hermitian_ok && spectrum_ok && gamma_ok; }

    std::string describe() const {
        std::ostringstream msg;
        msg << "hermiticity residual " << hermiticity << (hermitian_ok ? " (ok)" : " (FAIL)")
            << "; spectrum [" << spectrum_low << ", " << spectrum_high << "]"
            << (spectrum_ok ? " (ok)" : " (FAIL)") << "; involution-compatibility residual "
            << gamma_residual << (gamma_ok ? " (ok)" : " (FAIL)");
        return msg.str();
    }
};

inline CovarianceCheck check_covariance(const Matrix& s, const Involution& gamma,
                                        double gamma_tol = 1e-10) {
    if (s.rows() != s.cols() || s.rows() != gamma.dim())
        throw validation_error("covariance: operator must be square with the involution's dimension");
    CovarianceCheck out;
    out.herm_tol = scaled_tol(s.rows());
    out.spectrum_tol = scaled_tol(s.rows());
    out.gamma_tol = gamma_tol;
    out.hermiticity = hermiticity_residual(s);
    out.hermitian_ok = out.hermiticity <= out.herm_tol;
    if (out.hermitian_ok) {
        const auto eig = herm_eig(s);
        out.spectrum_low = eig.values.minCoeff();
        out.spectrum_high = eig.values.maxCoeff();
        out.spectrum_ok =
            out.spectrum_low >= -out.spectrum_tol && out.spectrum_high <= 1.0 + out.spectrum_tol;
    }
    const Matrix id = Matrix::Identity(s.rows(), s.cols());
    out.gamma_residual = max_abs(gamma.conjugate_map(s) - (id - s));
    out.gamma_ok = out.gamma_residual <= gamma_tol;
    return out;
}

/// Covariance operator S on (H, Gamma): Hermitian, 0 <= S <= 1, and
/// Gamma S Gamma = 1 - S. `validated` enforces all three; `unchecked` skips
/// the checks so experiments can probe Hermitian operators that break the
/// involution-compatibility condition (their Wick functional is still
/// well-defined, it just need not be a state).
class CovarianceOperator {
public:
    static CovarianceOperator validated(Matrix s, Involution gamma, double gamma_tol = 1e-10) {
        const auto check = check_covariance(s, gamma, gamma_tol);
        if (!check.ok())
            throw validation_error("covariance: " + check.describe());
        return CovarianceOperator(std::move(s), std::move(gamma));
    }

    static CovarianceOperator unchecked(Matrix s, Involution gamma) {
        if (s.rows() != s.cols() || s.rows() != gamma.dim())
            throw validation_error("covariance: operator must be square with the involution's dimension");
        if (hermiticity_residual(s) > scaled_tol(s.rows()))
            throw validation_error("covariance: even unchecked operators must be Hermitian");
        return CovarianceOperator(std::move(s), std::move(gamma));
    }

    Index dim() const { return s_.rows(); }
    const Matrix& matrix() const { return s_; }
    const Involution& gamma() const { return gamma_; }

private:
    CovarianceOperator(Matrix s, Involution gamma) : s_(std::move(s)), gamma_(std::move(gamma)) {}
    Matrix s_;
    Involution gamma_;
};

/// Gamma-adapted orthonormal frame {eps_1..eps_n} u {Gamma eps_i} (u {eps_0}
/// when dim is odd, with Gamma eps_0 = eps_0). When produced by
/// adapted_diagonalize, alphas holds the eigenvalue of S on eps_i (>= 1/2,
/// descending) and S eps_0 = 1/2 eps_0; a bare frame leaves alphas empty.
struct GammaAdaptedBasis {
    Matrix epsilons;                     // k x n, columns eps_i
    std::vector<double> alphas;          // per eps_i, empty for a bare frame
    std::optional<Vector> zero_vector;   // eps_0 for odd dimension
    Parity parity = Parity::even;
    Involution gamma;

    Index n() const { return epsilons.cols(); }
    Index dim() const { return gamma.dim(); }

    /// max deviation from orthonormality and from the Gamma pairing structure.
    double frame_residual() const {
        const Index k = dim();
        const Index nn = n();
        Matrix frame(k, 2 * nn + (parity == Parity::odd ? 1 : 0));
        for (Index i = 0; i < nn; ++i) {
            frame.col(i) = epsilons.col(i);
            frame.col(nn + i) = gamma.apply(epsilons.col(i));
        }
        if (parity == Parity::odd) {
            frame.col(2 * nn) = *zero_vector;
        }
        double res = max_abs(Matrix(frame.adjoint() * frame -
                                    Matrix::Identity(frame.cols(), frame.cols())));
        if (parity == Parity::odd)
            res = std::max(res, max_abs(Vector(gamma.apply(*zero_vector) - *zero_vector)));
        if (frame.cols() != k)
            throw internal_error("adapted frame does not span the space");
        return res;
    }
};

namespace detail {

/// Extracts an R-orthonormal Gamma-fixed basis of the Gamma-invariant span of
/// the given orthonormal columns (the 1/2-eigenspace case). Candidates
/// v + Gamma v and i(v - Gamma v) span the real form; real-coefficient
/// Gram-Schmidt keeps them Gamma-fixed.
inline std::vector<Vector> gamma_real_basis(const Matrix& columns, const Involution& gamma) {
    const Index m = columns.cols();
    std::vector<Vector> basis;
    basis.reserve(m);
    for (Index j = 0; j < m && static_cast<Index>(basis.size()) < m; ++j) {
        const Vector v = columns.col(j);
        const Vector gv = gamma.apply(v);
        for (Vector cand : {Vector(v + gv), Vector(Complex(0, 1) * (v - gv))}) {
            if (static_cast<Index>(basis.size()) == m) break;
            for (const Vector& u : basis) cand -= inner(cand, u) * u;
            const double norm = cand.norm();
            if (norm > 1e-6) basis.push_back(cand / norm);
        }
    }
    if (static_cast<Index>(basis.size()) != m)
        throw internal_error("gamma_real_basis: real form dimension mismatch");
    return basis;
}

struct JointBlock {
    double alpha;        // eigenvalue of S on the block
    double alpha2;       // eigenvalue of S2 on the block (equals alpha for single-operator use)
    Matrix columns;      // orthonormal basis of the joint eigenspace
};

/// Assembles the adapted basis out of joint eigenblocks: blocks strictly above
/// (1/2, 1/2) in lexicographic order become eps columns, the central block is
/// Gamma-real-paired, blocks below are the Gamma partners of blocks above.
inline std::pair<GammaAdaptedBasis, std::vector<std::pair<double, double>>>
adapt_blocks(std::vector<JointBlock> blocks, const Involution& gamma, double pair_tol) {
    const Index k = gamma.dim();
    const auto near_half = [&](double a) { return std::abs(a - 0.5) <= pair_tol; };
    const auto snap = [&](double a) { return near_half(a) ? 0.5 : a; };

    struct Column {
        Vector eps;
        double alpha, alpha2;
    };
    std::vector<Column> cols;
    std::optional<Vector> zero;

    Matrix central(k, 0);
    for (auto& b : blocks) {
        b.alpha = snap(b.alpha);
        b.alpha2 = snap(b.alpha2);
        const bool above = b.alpha > 0.5 + pair_tol ||
                           (b.alpha == 0.5 && b.alpha2 > 0.5 + pair_tol);
        const bool central_block = b.alpha == 0.5 && b.alpha2 == 0.5;
        if (central_block) {
            central.conservativeResize(k, central.cols() + b.columns.cols());
            central.rightCols(b.columns.cols()) = b.columns;
        } else if (above) {
            for (Index j = 0; j < b.columns.cols(); ++j)
                cols.push_back({b.columns.col(j), b.alpha, b.alpha2});
        }
        // blocks below (1/2, 1/2) are reached as Gamma images of the ones above
    }

    if (central.cols() > 0) {
        const auto reals = gamma_real_basis(central, gamma);
        for (std::size_t j = 0; j + 1 < reals.size(); j += 2)
            cols.push_back({(reals[j] + Complex(0, 1) * reals[j + 1]) / std::sqrt(2.0), 0.5, 0.5});
        if (reals.size() % 2 == 1) zero = reals.back();
    }

    const Parity parity = (k % 2 == 1) ? Parity::odd : Parity::even;
    if ((parity == Parity::odd) != zero.has_value())
        throw internal_error("adapted diagonalization: zero-mode presence does not match dimension parity");
    if (static_cast<Index>(cols.size()) * 2 + (zero ? 1 : 0) != k)
        throw internal_error("adapted diagonalization: frame does not span the space");

    std::stable_sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) {
        if (a.alpha != b.alpha) return a.alpha > b.alpha;
        return a.alpha2 > b.alpha2;
    });

    GammaAdaptedBasis basis{Matrix(k, static_cast<Index>(cols.size())), {}, zero, parity, gamma};
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        basis.epsilons.col(static_cast<Index>(i)) = cols[i].eps;
        basis.alphas.push_back(cols[i].alpha);
        pairs.emplace_back(cols[i].alpha, cols[i].alpha2);
    }
    return {std::move(basis), std::move(pairs)};
}

}  // namespace detail

/// Gamma-adapted diagonalization of a covariance operator: orthonormal
/// {eps_i, Gamma eps_i} (plus a Gamma-fixed eps_0 in odd dimension) with
/// S eps_i = alpha_i eps_i, S Gamma eps_i = (1 - alpha_i) Gamma eps_i,
/// alpha_i >= 1/2 reported in descending order. Eigenvalues within pair_tol of
/// 1/2 are merged into the central block and handled by the Gamma-real pairing
/// construction.
inline GammaAdaptedBasis adapted_diagonalize(const CovarianceOperator& cov,
                                             double pair_tol = 1e-8) {
    const auto eig = herm_eig(cov.matrix());
    const auto groups = group_eigenvalues(eig.values, scaled_tol(cov.dim()));
    std::vector<detail::JointBlock> blocks;
    for (const auto& [begin, end] : groups) {
        const double alpha = eig.values.segment(begin, end - begin).mean();
        blocks.push_back({alpha, alpha, eig.vectors.middleCols(begin, end - begin)});
    }
    // merge everything within pair_tol of 1/2 into one central block
    std::vector<detail::JointBlock> merged;
    Matrix central(cov.dim(), 0);
    for (auto& b : blocks) {
        if (std::abs(b.alpha - 0.5) <= pair_tol) {
            central.conservativeResize(cov.dim(), central.cols() + b.columns.cols());
            central.rightCols(b.columns.cols()) = b.columns;
        } else {
            merged.push_back(std::move(b));
        }
    }
    if (central.cols() > 0) merged.push_back({0.5, 0.5, std::move(central)});
    auto [basis, pairs] = detail::adapt_blocks(std::move(merged), cov.gamma(), pair_tol);
    return std::move(basis);
}

/// Simultaneous Gamma-adapted diagonalization of a commuting pair: one frame
/// with S eps_i = alpha_i eps_i and S2 eps_i = alpha_i' eps_i. Joint
/// eigenspaces keep the differing-index count well-defined under degeneracy.
struct JointDiagonalization {
    GammaAdaptedBasis basis;
    std::vector<std::pair<double, double>> alphas;  // (alpha_i, alpha_i'), ordered with the frame
};

inline double commutator_norm(const CovarianceOperator& a, const CovarianceOperator& b) {
    return max_abs(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

inline JointDiagonalization simultaneous_adapted_diagonalize(const CovarianceOperator& cov,
                                                             const CovarianceOperator& cov2,
                                                             double commute_tol = 1e-10,
                                                             double pair_tol = 1e-8) {
    if (cov.dim() != cov2.dim())
        throw validation_error("simultaneous diagonalization: dimension mismatch");
    const double comm = commutator_norm(cov, cov2);
    if (comm > commute_tol) {
        std::ostringstream msg;
        msg << "simultaneous diagonalization: commutator norm " << comm << " exceeds "
            << commute_tol << "; use the numeric affinity test for non-commuting pairs";
        throw precondition_error(msg.str());
    }

    const auto eig = herm_eig(cov.matrix());
    const auto groups = group_eigenvalues(eig.values, scaled_tol(cov.dim()));
    std::vector<detail::JointBlock> blocks;
    for (const auto& [begin, end] : groups) {
        const double alpha = eig.values.segment(begin, end - begin).mean();
        const Matrix basis_block = eig.vectors.middleCols(begin, end - begin);
        // refine by the compression of S2 onto this eigenspace
        const Matrix compressed = basis_block.adjoint() * cov2.matrix() * basis_block;
        const auto sub = herm_eig(compressed);
        const auto sub_groups = group_eigenvalues(sub.values, scaled_tol(cov.dim()));
        for (const auto& [b2, e2] : sub_groups) {
            const double alpha2 = sub.values.segment(b2, e2 - b2).mean();
            blocks.push_back({alpha, alpha2, basis_block * sub.vectors.middleCols(b2, e2 - b2)});
        }
    }

    // merge joint blocks that are central for both operators
    std::vector<detail::JointBlock> merged;
    Matrix central(cov.dim(), 0);
    for (auto& b : blocks) {
        if (std::abs(b.alpha - 0.5) <= pair_tol && std::abs(b.alpha2 - 0.5) <= pair_tol) {
            central.conservativeResize(cov.dim(), central.cols() + b.columns.cols());
            central.rightCols(b.columns.cols()) = b.columns;
        } else {
            merged.push_back(std::move(b));
        }
    }
    if (central.cols() > 0) merged.push_back({0.5, 0.5, std::move(central)});

    auto [basis, pairs] = detail::adapt_blocks(std::move(merged), cov.gamma(), pair_tol);
    return {std::move(basis), std::move(pairs)};
}

/// Builds the covariance operator that is diagonal in the given frame with the
/// given eps-eigenvalues (any values in [0,1]; the Gamma partners get 1-alpha,
/// the zero mode gets 1/2).
inline CovarianceOperator covariance_from_frame(const GammaAdaptedBasis& frame,
                                                const std::vector<double>& alphas) {
    if (static_cast<Index>(alphas.size()) != frame.n())
        throw validation_error("covariance_from_frame: need one alpha per frame vector");
    const Index k = frame.dim();
    Matrix s = Matrix::Zero(k, k);
    for (Index i = 0; i < frame.n(); ++i) {
        const Vector eps = frame.epsilons.col(i);
        const Vector geps = frame.gamma.apply(eps);
        s += alphas[i] * (eps * eps.adjoint()) + (1.0 - alphas[i]) * (geps * geps.adjoint());
    }
    if (frame.parity == Parity::odd)
        s += 0.5 * (*frame.zero_vector) * frame.zero_vector->adjoint();
    return CovarianceOperator::validated(std::move(s), frame.gamma);
}

/// Deterministic random covariance operator: S = (I + D)/2 with D the
/// Gamma-odd part of a random Hermitian matrix, rescaled so |D| <= scale < 1.
inline CovarianceOperator random_covariance(Index k, const Involution& gamma, double scale,
                                            std::uint64_t seed) {
    if (k != gamma.dim())
        throw validation_error("random_covariance: dimension does not match the involution");
    if (!(scale >= 0.0 && scale <= 1.0))
        throw validation_error("random_covariance: scale must lie in [0, 1]");
    Rng rng(seed);
    const Matrix t = rng.hermitian(k);
    Matrix d = 0.5 * (t - gamma.conjugate_map(t));
    const auto eig = herm_eig(d);
    const double norm = std::max(std::abs(eig.values.minCoeff()), std::abs(eig.values.maxCoeff()));
    d *= scale / std::max(1.0, norm);
    Matrix s = 0.5 * (Matrix::Identity(k, k) + d);
    return CovarianceOperator::validated(std::move(s), gamma);
}

/// Random Gamma-adapted frame: the adapted basis of a random covariance
/// operator, stripped of its eigenvalue data.
inline GammaAdaptedBasis random_frame(Index k, const Involution& gamma, std::uint64_t seed) {
    auto basis = adapted_diagonalize(random_covariance(k, gamma, 0.9, seed));
    basis.alphas.clear();
    return basis;
}

/// Number of eigenvalues of S - S2 with magnitude above tol (tol < 0 picks the
/// dimension-scaled default).
inline int difference_rank(const CovarianceOperator& a, const CovarianceOperator& b,
                           double tol = -1.0) {
    if (a.dim() != b.dim())
        throw validation_error("difference_rank: dimension mismatch");
    if (tol < 0) tol = scaled_tol(a.dim());
    const auto eig = herm_eig(a.matrix() - b.matrix());
    int rank = 0;
    for (Index i = 0; i < eig.values.size(); ++i)
        if (std::abs(eig.values[i]) > tol) ++rank;
    return rank;
}

/// Bilinear form B(xi, eta) = (S xi, Gamma eta); complex-bilinear because
/// Gamma's conjugation cancels the inner product's conjugate linearity.
inline Complex gamma_form(const CovarianceOperator& cov, const Vector& xi, const Vector& eta) {
    if (xi.size() != cov.dim() || eta.size() != cov.dim())
        throw validation_error("gamma_form: vector dimension mismatch");
    return inner(cov.matrix() * xi, cov.gamma().apply(eta));
}

}  // namespace quasifree
