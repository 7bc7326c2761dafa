#pragma once

#include "quasifree/car_rep.hpp"
#include "quasifree/covariance.hpp"
#include "quasifree/numerics.hpp"

#include <utility>
#include <vector>

namespace quasifree {

/// phi(b(xi) b(eta)) = (S eta, Gamma xi).
inline Complex two_point(const CovarianceOperator& cov, const Vector& xi, const Vector& eta) {
    return gamma_form(cov, eta, xi);
}

namespace detail {

/// Sign of the pairing (p_1 q_1)(p_2 q_2)... as a permutation of 1..2n,
/// computed as the inversion parity of (p_1..p_n, q_1..q_n).
inline int partition_sign(const std::vector<std::pair<int, int>>& pairs) {
    std::vector<int> seq;
    seq.reserve(2 * pairs.size());
    for (const auto& pq : pairs) seq.push_back(pq.first);
    for (const auto& pq : pairs) seq.push_back(pq.second);
    int inversions = 0;
    for (std::size_t i = 0; i < seq.size(); ++i)
        for (std::size_t j = i + 1; j < seq.size(); ++j)
            if (seq[i] > seq[j]) ++inversions;
    return inversions % 2 ? -1 : 1;
}

/// Enumerates all pair partitions of {0..k-1} with p_j < q_j and p_1 < p_2 < ...
/// Calls fn(pairs, sign) for each. k must be even.
template <typename Fn>
void for_each_pair_partition(std::vector<int>& remaining,
                             std::vector<std::pair<int, int>>& pairs, Fn&& fn) {
    if (remaining.empty()) {
        fn(pairs, partition_sign(pairs));
        return;
    }
    const int p = remaining.front();
    for (std::size_t j = 1; j < remaining.size(); ++j) {
        const int q = remaining[j];
        std::vector<int> rest;
        rest.reserve(remaining.size() - 2);
        for (std::size_t t = 1; t < remaining.size(); ++t)
            if (t != j) rest.push_back(remaining[t]);
        pairs.emplace_back(p, q);
        for_each_pair_partition(rest, pairs, fn);
        pairs.pop_back();
    }
}

template <typename Fn>
void for_each_pair_partition(int k, Fn&& fn) {
    std::vector<int> remaining(k);
    for (int i = 0; i < k; ++i) remaining[i] = i;
    std::vector<std::pair<int, int>> pairs;
    for_each_pair_partition(remaining, pairs, fn);
}

}  // namespace detail

/// Wick sum over a precomputed two-point table: for factors at rows
/// r_1..r_k of tp, returns 0 for odd k, 1 for k = 0, and otherwise
/// (-1)^{n(n-1)/2} sum over pair partitions of sign * prod tp(r_p, r_q).
inline Complex wick_from_table(const Matrix& tp, const std::vector<Index>& rows) {
    const int k = static_cast<int>(rows.size());
    if (k % 2) return 0.0;
    if (k == 0) return 1.0;
    if (k > 16)
        throw resource_error("wick sum over " + std::to_string(k) + " factors exceeds the cap");
    const int n = k / 2;
    const double prefactor = (n * (n - 1) / 2) % 2 ? -1.0 : 1.0;
    Complex total = 0.0;
    detail::for_each_pair_partition(k, [&](const std::vector<std::pair<int, int>>& pairs, int sign) {
        Complex term = static_cast<double>(sign);
        for (const auto& pq : pairs) term *= tp(rows[pq.first], rows[pq.second]);
        total += term;
    });
    return prefactor * total;
}

/// phi(b(xi_1) ... b(xi_k)) for ambient vectors xi_i.
inline Complex wick_eval(const CovarianceOperator& cov, const std::vector<Vector>& xs) {
    const Index k = static_cast<Index>(xs.size());
    Matrix tp(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) tp(i, j) = two_point(cov, xs[i], xs[j]);
    std::vector<Index> rows(xs.size());
    for (Index i = 0; i < k; ++i) rows[i] = i;
    return wick_from_table(tp, rows);
}

inline Index majorana_row(Parity parity, int label) {
    return parity == Parity::odd ? label : label - 1;
}

/// Two-point table of the Majorana vectors attached to a frame, indexed by
/// majorana_row of the labels (0,)1..2n.
inline Matrix majorana_table(const CovarianceOperator& cov, const GammaAdaptedBasis& frame) {
    std::vector<Vector> vs;
    if (frame.parity == Parity::odd)
        vs.push_back(majorana_frame_vector(static_cast<int>(frame.n()), frame.parity, 0)
                         .ambient(frame));
    for (int i = 1; i <= frame.n(); ++i) {
        vs.push_back(majorana_frame_vector(static_cast<int>(frame.n()), frame.parity, 2 * i - 1)
                         .ambient(frame));
        vs.push_back(majorana_frame_vector(static_cast<int>(frame.n()), frame.parity, 2 * i)
                         .ambient(frame));
    }
    const Index m = static_cast<Index>(vs.size());
    Matrix tp(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) tp(i, j) = two_point(cov, vs[i], vs[j]);
    return tp;
}

/// phi_S(A) for an algebra element expressed over the given frame: expands A
/// in the Majorana monomial basis and evaluates each monomial by Wick sum.
inline Complex evaluate(const CovarianceOperator& cov, const GammaAdaptedBasis& frame,
                        const AlgebraElement& a) {
    const JordanWignerRep& rep = *a.rep;
    if (rep.n != frame.n() || rep.parity != frame.parity)
        throw validation_error("evaluate: frame and representation shapes do not match");
    const Matrix tp = majorana_table(cov, frame);
    Complex out = 0.0;
    for (const auto& [index_set, coeff] : expand(a)) {
        std::vector<Index> rows;
        rows.reserve(index_set.size());
        for (int label : index_set) rows.push_back(majorana_row(frame.parity, label));
        out += coeff * wick_from_table(tp, rows);
    }
    return out;
}

/// Product density matrix diag(alpha_1, 1-alpha_1) (x) ... ; odd parity
/// appends diag(1/2, 1/2). Reproduces the quasi-free state on elements
/// expressed over the state's own adapted frame.
inline Matrix density_matrix(const JordanWignerRep& rep, const std::vector<double>& alphas) {
    if (static_cast<int>(alphas.size()) != rep.n)
        throw validation_error("density_matrix: alpha count does not match the mode count");
    Matrix rho = Matrix::Identity(1, 1);
    Matrix site(2, 2);
    for (double alpha : alphas) {
        site << alpha, 0, 0, 1.0 - alpha;
        rho = kron(rho, site);
    }
    if (rep.parity == Parity::odd) {
        site << 0.5, 0, 0, 0.5;
        rho = kron(rho, site);
    }
    return rho;
}

/// Trace against the product density matrix with the given occupation
/// spectrum; the matrix dimension fixes the parity. This is the value a
/// state assigns to a matrix read in its own normal form, with no basis
/// alignment between different states.
inline Complex normal_form_value(const std::vector<double>& alphas, Parity parity,
                                 const Matrix& a) {
    if (alphas.size() >= 24)
        throw resource_error("normal_form_value: mode count exceeds the cap");
    const Index dim = (Index(1) << alphas.size()) * (parity == Parity::odd ? 2 : 1);
    if (a.rows() != dim || a.cols() != dim)
        throw validation_error("normal_form_value: matrix dimension does not match the spectrum");
    Matrix rho = Matrix::Identity(1, 1);
    Matrix site(2, 2);
    for (double alpha : alphas) {
        site << alpha, 0, 0, 1.0 - alpha;
        rho = kron(rho, site);
    }
    if (parity == Parity::odd) {
        site << 0.5, 0, 0, 0.5;
        rho = kron(rho, site);
    }
    return (rho * a).trace();
}

/// A quasi-free state bundled with its adapted frame.
class QuasiFreeState {
  public:
    explicit QuasiFreeState(CovarianceOperator cov, double pair_tol = 1e-8)
        : cov_(std::move(cov)), basis_(adapted_diagonalize(cov_, pair_tol)) {}

    const CovarianceOperator& covariance() const { return cov_; }
    const GammaAdaptedBasis& basis() const { return basis_; }
    const std::vector<double>& alphas() const { return basis_.alphas; }

    Complex two_point(const Vector& xi, const Vector& eta) const {
        return quasifree::two_point(cov_, xi, eta);
    }
    Complex moment(const std::vector<Vector>& xs) const { return wick_eval(cov_, xs); }

    /// Value on an element expressed over this state's own adapted frame.
    Complex value(const AlgebraElement& a) const { return evaluate(cov_, basis_, a); }

    /// Density matrix in the matching representation.
    Matrix density(const JordanWignerRep& rep) const {
        if (rep.n != basis_.n() || rep.parity != basis_.parity)
            throw validation_error("density: representation shape does not match the state");
        return density_matrix(rep, basis_.alphas);
    }

  private:
    CovarianceOperator cov_;
    GammaAdaptedBasis basis_;
};

/// (S xi, Gamma xi) collapses to sum_i x_i y_i (+ z^2/2 for the zero mode)
/// in the coordinates of any frame adapted to S, independent of the spectrum.
inline Complex adapted_form_reference(const GammaAdaptedBasis& frame, const Vector& xi) {
    const FrameVector v = frame_coordinates(frame, xi);
    Complex out = 0.0;
    for (Index i = 0; i < frame.n(); ++i) out += v.x[i] * v.y[i];
    if (frame.parity == Parity::odd) out += 0.5 * v.x0 * v.x0;
    return out;
}

}  // namespace quasifree
