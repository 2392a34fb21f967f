#include "flagdyn/linalg_core.hpp"

#include "flagdyn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>

namespace flagdyn {

namespace {

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

std::function<void(const std::string&)>& handler_slot() {
    static std::function<void(const std::string&)> h = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return h;
}

constexpr double kAcceptDetTol = 1e-9;
constexpr double kRescaleDetTol = 1e-4;
constexpr double kMinDiagonal = 1e-14;

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
    std::lock_guard lock(handler_mutex());
    handler_slot() = std::move(handler);
}

void warn(const std::string& message) {
    std::lock_guard lock(handler_mutex());
    if (handler_slot()) {
        handler_slot()(message);
    }
}

double hadamard_scale(const Matrix& m) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        p *= m.col(j).norm();
    }
    return std::max(1.0, p);
}

void normalize_determinant(Matrix& m) {
    const double det = m.determinant();
    if (!(det > 0.0)) {
        throw InvalidGroupElementError("cannot normalize a matrix with non-positive determinant");
    }
    m *= std::pow(det, -1.0 / static_cast<double>(m.rows()));
}

GroupElement::GroupElement(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) {
        throw InvalidGroupElementError("group element must be square");
    }
    if (m_.rows() < 2) {
        throw InvalidGroupElementError("group element must have n >= 2");
    }
    if (!m_.allFinite()) {
        throw InvalidGroupElementError("group element has non-finite entries");
    }
    const double det = m_.determinant();
    const double scale = hadamard_scale(m_);
    const double err = std::abs(det - 1.0);
    if (err <= kAcceptDetTol * scale) {
        return;
    }
    if (err <= kRescaleDetTol * scale && det > 0.0) {
        std::ostringstream os;
        os << "determinant " << det << " rescaled to 1";
        warn(os.str());
        normalize_determinant(m_);
        return;
    }
    std::ostringstream os;
    os << "determinant " << det << " is not 1";
    throw InvalidGroupElementError(os.str());
}

GroupElement GroupElement::identity(int n) {
    if (n < 2) {
        throw InvalidGroupElementError("group element must have n >= 2");
    }
    return GroupElement(Matrix::Identity(n, n), Trusted{});
}

GroupElement GroupElement::from_product(Matrix entries) {
    normalize_determinant(entries);
    return GroupElement(std::move(entries), Trusted{});
}

GroupElement GroupElement::operator*(const GroupElement& rhs) const {
    if (rhs.dim() != dim()) {
        throw InvalidGroupElementError("dimension mismatch in product");
    }
    return from_product(m_ * rhs.m_);
}

GroupElement GroupElement::inverse() const {
    return from_product(m_.inverse());
}

void orthonormalize_columns(Eigen::Ref<Matrix> m) {
    const Eigen::Index n = m.cols();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double original = m.col(j).norm();
        // two passes: the second removes what the first left behind
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < j; ++i) {
                const double r = m.col(i).dot(m.col(j));
                m.col(j) -= r * m.col(i);
            }
        }
        const double nrm = m.col(j).norm();
        if (!(nrm > kMinDiagonal * std::max(1.0, original))) {
            throw NumericalRankError("column collapsed during orthonormalization");
        }
        m.col(j) /= nrm;
    }
}

IwasawaTriple iwasawa_decompose(const GroupElement& g) {
    const Matrix& gm = g.matrix();
    const Eigen::Index n = gm.rows();
    Matrix k = gm;
    orthonormalize_columns(k);
    Matrix r = k.transpose() * gm;
    IwasawaTriple out{k, Vector(n), Matrix::Identity(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = r(i, i);
        if (!(d > kMinDiagonal)) {
            throw NumericalRankError("Iwasawa A factor is numerically singular");
        }
        out.a(i) = d;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            out.nfac(i, j) = r(i, j) / d;
        }
    }
    return out;
}

Matrix iwasawa_project(const GroupElement& g) {
    return iwasawa_decompose(g).k;
}

void canonicalize_sign(Eigen::Ref<Vector> v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v(i)) > std::abs(v(best))) {
            best = i;
        }
    }
    if (v(best) < 0.0) {
        v = -v;
    }
}

bool is_special_orthogonal(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const Matrix e = m.transpose() * m - Matrix::Identity(m.rows(), m.cols());
    return e.norm() <= tol && m.determinant() > 0.0;
}

Matrix RegularSplit::reconstruct() const {
    const Matrix& c = conjugator.matrix();
    return c * logs.array().exp().matrix().asDiagonal() * c.inverse();
}

namespace {

// Shared body of regular_split_decompose / is_regular_positive. Eigenvectors
// are only computed when `out` is non-null.
enum class SplitFailure { none, complex, not_regular };

SplitFailure try_split(const GroupElement& h, double tol, RegularSplit* out) {
    const Matrix& hm = h.matrix();
    const Eigen::Index n = hm.rows();
    Eigen::EigenSolver<Matrix> es(hm, /*computeEigenvectors=*/out != nullptr);
    if (es.info() != Eigen::Success) {
        return SplitFailure::not_regular;
    }
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(ev(i).imag()) > tol) {
            return SplitFailure::complex;
        }
        if (!(ev(i).real() > 0.0)) {
            return SplitFailure::not_regular;
        }
    }
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return ev(a).real() > ev(b).real(); });
    Vector logs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        logs(i) = std::log(ev(order[static_cast<size_t>(i)]).real());
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (!(logs(i) - logs(i + 1) > tol)) {
            return SplitFailure::not_regular;
        }
    }
    if (out == nullptr) {
        return SplitFailure::none;
    }
    Matrix vecs(n, n);
    const auto cv = es.eigenvectors();
    for (Eigen::Index j = 0; j < n; ++j) {
        vecs.col(j) = cv.col(order[static_cast<size_t>(j)]).real();
        const double nrm = vecs.col(j).norm();
        if (!(nrm > 0.0)) {
            return SplitFailure::not_regular;
        }
        vecs.col(j) /= nrm;
        canonicalize_sign(vecs.col(j));
    }
    if (vecs.determinant() < 0.0) {
        vecs.col(n - 1) = -vecs.col(n - 1);
    }
    normalize_determinant(vecs);
    *out = RegularSplit{GroupElement::from_product(std::move(vecs)), std::move(logs)};
    return SplitFailure::none;
}

}  // namespace

RegularSplit regular_split_decompose(const GroupElement& h, double tol) {
    RegularSplit out{GroupElement::identity(h.dim()), Vector()};
    switch (try_split(h, tol, &out)) {
        case SplitFailure::complex:
            throw ComplexSpectrumError("element has non-real eigenvalues");
        case SplitFailure::not_regular:
            throw NotRegularError("element is not regular with positive spectrum");
        case SplitFailure::none:
            break;
    }
    return out;
}

bool is_regular_positive(const GroupElement& h, double tol) {
    return try_split(h, tol, nullptr) == SplitFailure::none;
}

}  // namespace flagdyn
