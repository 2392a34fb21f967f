#pragma once

// Dense small-matrix numerics for SL(n,R): Iwasawa factorization g = k a n,
// the K-projection kappa, and eigen-splitting of regular positive elements.

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace flagdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default separation required between consecutive log-eigenvalues.
inline constexpr double kDefaultRegularityTol = 1e-6;

/// Receives non-fatal diagnostics (det renormalization, sparse graphs).
/// The default handler writes to stderr; an empty handler drops them.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);

/// An element of SL(n,R), n >= 2.
///
/// Construction validates |det - 1| against the Hadamard bound of the input
/// (product of column norms, floored at 1). Deviations up to 1e-9 of that
/// scale are accepted as-is; up to 1e-4 the matrix is rescaled by
/// det^(-1/n) and a warning is emitted; anything else is rejected.
class GroupElement {
public:
    explicit GroupElement(Matrix entries);

    static GroupElement identity(int n);
    /// Rescales a matrix with positive determinant onto SL(n,R) without the
    /// tolerance window. Used for products of validated elements.
    static GroupElement from_product(Matrix entries);

    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(m_.rows()); }

    [[nodiscard]] GroupElement operator*(const GroupElement& rhs) const;
    [[nodiscard]] GroupElement inverse() const;

private:
    struct Trusted {};
    GroupElement(Matrix entries, Trusted) : m_(std::move(entries)) {}

    Matrix m_;
};

/// Factors (k, a, n) of g = k * diag(a) * nfac.
struct IwasawaTriple {
    Matrix k;     ///< special orthogonal
    Vector a;     ///< positive diagonal of the A factor
    Matrix nfac;  ///< unit upper triangular

    [[nodiscard]] Matrix a_matrix() const { return a.asDiagonal(); }
    [[nodiscard]] Matrix reconstruct() const { return k * a.asDiagonal() * nfac; }
};

/// h = conjugator * diag(exp(logs)) * conjugator^-1 with logs strictly
/// decreasing. Columns of the conjugator are eigenvectors.
struct RegularSplit {
    GroupElement conjugator;
    Vector logs;

    [[nodiscard]] Matrix reconstruct() const;
};

/// Unique Iwasawa factorization with positive A. Throws NumericalRankError
/// if some a_ii <= 1e-14.
IwasawaTriple iwasawa_decompose(const GroupElement& g);

/// The K component kappa(g).
Matrix iwasawa_project(const GroupElement& g);

/// Eigen-split of a regular element with real positive spectrum.
///
/// Eigenvectors are scaled to unit norm with their largest-magnitude entry
/// positive. If the resulting matrix has negative determinant the last
/// column is negated, then the whole matrix is rescaled to determinant 1.
RegularSplit regular_split_decompose(const GroupElement& h, double tol = kDefaultRegularityTol);

/// True iff regular_split_decompose(h, tol) would succeed.
bool is_regular_positive(const GroupElement& h, double tol = kDefaultRegularityTol);

// Unchecked building blocks shared with the action code.

/// Replaces the columns of m by the Q factor of its QR decomposition with
/// positive-diagonal R (classical Gram-Schmidt with one re-orthogonalization
/// pass). Throws NumericalRankError when a column collapses.
void orthonormalize_columns(Eigen::Ref<Matrix> m);

/// Scales a matrix with positive determinant to determinant one.
void normalize_determinant(Matrix& m);

/// Product of column norms, floored at 1.
double hadamard_scale(const Matrix& m);

/// max |(m^T m - I)_ij| style check in Frobenius norm, plus det > 0.
bool is_special_orthogonal(const Matrix& m, double tol);

/// Flips the sign of v so that its entry of largest magnitude is positive.
/// Ties resolve to the lowest index.
void canonicalize_sign(Eigen::Ref<Vector> v);

}  // namespace flagdyn
