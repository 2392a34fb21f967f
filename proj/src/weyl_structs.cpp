#include "flagdyn/weyl_structs.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace flagdyn {

namespace {

void check_permutation(const std::vector<int>& perm) {
    std::vector<bool> seen(perm.size(), false);
    for (int p : perm) {
        if (p < 0 || p >= static_cast<int>(perm.size()) || seen[static_cast<size_t>(p)]) {
            throw std::invalid_argument("not a permutation");
        }
        seen[static_cast<size_t>(p)] = true;
    }
}

int sign_product(const std::vector<int>& signs) {
    int p = 1;
    for (int s : signs) {
        if (s != 1 && s != -1) {
            throw std::invalid_argument("sign entries must be +1 or -1");
        }
        p *= s;
    }
    return p;
}

int permutation_sign(const std::vector<int>& perm) {
    int sign = 1;
    std::vector<bool> seen(perm.size(), false);
    for (size_t i = 0; i < perm.size(); ++i) {
        if (seen[i]) {
            continue;
        }
        size_t len = 0;
        for (size_t j = i; !seen[j]; j = static_cast<size_t>(perm[j])) {
            seen[j] = true;
            ++len;
        }
        if (len % 2 == 0) {
            sign = -sign;
        }
    }
    return sign;
}

std::string signs_string(const std::vector<int>& signs) {
    std::string s = "(";
    for (size_t i = 0; i < signs.size(); ++i) {
        if (i) {
            s += ',';
        }
        s += signs[i] > 0 ? '+' : '-';
    }
    return s + ")";
}

}  // namespace

WeylElement::WeylElement(std::vector<int> perm) : perm_(std::move(perm)) { check_permutation(perm_); }

WeylElement WeylElement::identity(int n) {
    std::vector<int> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    return WeylElement(std::move(p));
}

WeylElement WeylElement::transposition(int n, int i, int j) {
    std::vector<int> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::swap(p.at(static_cast<size_t>(i)), p.at(static_cast<size_t>(j)));
    return WeylElement(std::move(p));
}

bool WeylElement::is_identity() const {
    for (size_t i = 0; i < perm_.size(); ++i) {
        if (perm_[i] != static_cast<int>(i)) {
            return false;
        }
    }
    return true;
}

WeylElement WeylElement::operator*(const WeylElement& rhs) const {
    std::vector<int> p(perm_.size());
    for (size_t j = 0; j < p.size(); ++j) {
        p[j] = perm_[static_cast<size_t>(rhs.perm_[j])];
    }
    return WeylElement(std::move(p));
}

WeylElement WeylElement::inverse() const {
    std::vector<int> p(perm_.size());
    for (size_t j = 0; j < p.size(); ++j) {
        p[static_cast<size_t>(perm_[j])] = static_cast<int>(j);
    }
    return WeylElement(std::move(p));
}

int WeylElement::sign() const { return permutation_sign(perm_); }

Matrix WeylElement::matrix() const {
    const auto n = static_cast<Eigen::Index>(perm_.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        m(perm_[static_cast<size_t>(j)], j) = 1.0;
    }
    return m;
}

std::string WeylElement::to_string() const {
    std::ostringstream os;
    std::vector<bool> seen(perm_.size(), false);
    for (size_t i = 0; i < perm_.size(); ++i) {
        if (seen[i] || perm_[i] == static_cast<int>(i)) {
            continue;
        }
        os << '(';
        for (size_t j = i; !seen[j]; j = static_cast<size_t>(perm_[j])) {
            seen[j] = true;
            os << (j == i ? "" : " ") << j + 1;
        }
        os << ')';
    }
    const std::string s = os.str();
    return s.empty() ? "id" : s;
}

SignVector::SignVector(std::vector<int> signs) : signs_(std::move(signs)) {
    if (sign_product(signs_) != 1) {
        throw std::invalid_argument("sign vector must have product +1");
    }
}

SignVector SignVector::identity(int n) { return SignVector(std::vector<int>(static_cast<size_t>(n), 1)); }

bool SignVector::is_identity() const {
    return std::all_of(signs_.begin(), signs_.end(), [](int s) { return s == 1; });
}

SignVector SignVector::operator*(const SignVector& rhs) const {
    std::vector<int> s(signs_.size());
    for (size_t i = 0; i < s.size(); ++i) {
        s[i] = signs_[i] * rhs.signs_[i];
    }
    return SignVector(std::move(s));
}

Matrix SignVector::matrix() const {
    Vector d(static_cast<Eigen::Index>(signs_.size()));
    for (size_t i = 0; i < signs_.size(); ++i) {
        d(static_cast<Eigen::Index>(i)) = signs_[i];
    }
    return d.asDiagonal();
}

std::string SignVector::to_string() const { return signs_string(signs_); }

SignedPermutation::SignedPermutation(std::vector<int> perm, std::vector<int> signs)
    : perm_(std::move(perm)), signs_(std::move(signs)) {
    check_permutation(perm_);
    if (signs_.size() != perm_.size()) {
        throw std::invalid_argument("perm and signs differ in length");
    }
    if (sign_product(signs_) * permutation_sign(perm_) != 1) {
        throw std::invalid_argument("signed permutation must have determinant +1");
    }
}

SignedPermutation SignedPermutation::identity(int n) {
    return from_signs(SignVector::identity(n));
}

SignedPermutation SignedPermutation::from_signs(const SignVector& c) {
    std::vector<int> p(static_cast<size_t>(c.dim()));
    std::iota(p.begin(), p.end(), 0);
    return SignedPermutation(std::move(p), c.signs());
}

SignedPermutation SignedPermutation::from_matrix(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("signed permutation matrix must be square");
    }
    const auto n = static_cast<size_t>(m.rows());
    std::vector<int> perm(n, -1);
    std::vector<int> signs(n, 0);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double v = m(i, j);
            if (std::abs(v) <= tol) {
                continue;
            }
            if (std::abs(std::abs(v) - 1.0) > tol || perm[static_cast<size_t>(j)] != -1) {
                throw std::invalid_argument("not a signed permutation matrix");
            }
            perm[static_cast<size_t>(j)] = static_cast<int>(i);
            signs[static_cast<size_t>(i)] = v > 0 ? 1 : -1;
        }
        if (perm[static_cast<size_t>(j)] == -1) {
            throw std::invalid_argument("not a signed permutation matrix");
        }
    }
    return SignedPermutation(std::move(perm), std::move(signs));
}

bool SignedPermutation::is_identity() const {
    return WeylElement(perm_).is_identity() &&
           std::all_of(signs_.begin(), signs_.end(), [](int s) { return s == 1; });
}

SignedPermutation SignedPermutation::operator*(const SignedPermutation& rhs) const {
    // (u1 u2) e_j = s2[p2 j] s1[p1 p2 j] e_{p1 p2 j}
    const size_t n = perm_.size();
    std::vector<int> p(n);
    std::vector<int> s(n);
    for (size_t j = 0; j < n; ++j) {
        const auto mid = static_cast<size_t>(rhs.perm_[j]);
        p[j] = perm_[mid];
        s[static_cast<size_t>(p[j])] = rhs.signs_[mid] * signs_[static_cast<size_t>(p[j])];
    }
    return SignedPermutation(std::move(p), std::move(s));
}

SignedPermutation SignedPermutation::inverse() const {
    // u^-1 e_i = s[i] e_{p^-1 i}, so the sign sitting at row p^-1(i) is s[i]
    const size_t n = perm_.size();
    std::vector<int> p(n);
    std::vector<int> s(n);
    for (size_t j = 0; j < n; ++j) {
        const auto i = static_cast<size_t>(perm_[j]);
        p[i] = static_cast<int>(j);
        s[j] = signs_[i];
    }
    return SignedPermutation(std::move(p), std::move(s));
}

Matrix SignedPermutation::matrix() const {
    const auto n = static_cast<Eigen::Index>(perm_.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const int i = perm_[static_cast<size_t>(j)];
        m(i, j) = signs_[static_cast<size_t>(i)];
    }
    return m;
}

std::string SignedPermutation::to_string() const {
    return WeylElement(perm_).to_string() + signs_string(signs_);
}

std::vector<SignVector> enumerate_M(int n) {
    if (n < 1) {
        throw std::invalid_argument("n must be positive");
    }
    std::vector<SignVector> out;
    const unsigned total = 1u << static_cast<unsigned>(n);
    // bit i set means coordinate (n-1-i) is negative, so counting upward is
    // lexicographic with + before -
    for (unsigned mask = 0; mask < total; ++mask) {
        std::vector<int> s(static_cast<size_t>(n));
        int prod = 1;
        for (int i = 0; i < n; ++i) {
            s[static_cast<size_t>(i)] = (mask >> static_cast<unsigned>(n - 1 - i)) & 1u ? -1 : 1;
            prod *= s[static_cast<size_t>(i)];
        }
        if (prod == 1) {
            out.emplace_back(std::move(s));
        }
    }
    return out;
}

std::vector<WeylElement> enumerate_W(int n) {
    std::vector<int> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::vector<WeylElement> out;
    do {
        out.emplace_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::vector<SignedPermutation> enumerate_Mstar(int n) {
    std::vector<SignedPermutation> out;
    const unsigned total = 1u << static_cast<unsigned>(n);
    for (const WeylElement& w : enumerate_W(n)) {
        const int target = w.sign();
        for (unsigned mask = 0; mask < total; ++mask) {
            std::vector<int> s(static_cast<size_t>(n));
            int prod = 1;
            for (int i = 0; i < n; ++i) {
                s[static_cast<size_t>(i)] = (mask >> static_cast<unsigned>(n - 1 - i)) & 1u ? -1 : 1;
                prod *= s[static_cast<size_t>(i)];
            }
            if (prod == target) {
                out.emplace_back(w.perm(), std::move(s));
            }
        }
    }
    return out;
}

WeylElement weyl_class(const SignedPermutation& u) { return WeylElement(u.perm()); }

SignedPermutation weyl_lift(const WeylElement& w) {
    const int n = w.dim();
    const unsigned total = 1u << static_cast<unsigned>(n);
    for (unsigned mask = 0; mask < total; ++mask) {
        std::vector<int> s(static_cast<size_t>(n));
        int prod = 1;
        for (int i = 0; i < n; ++i) {
            s[static_cast<size_t>(i)] = (mask >> static_cast<unsigned>(n - 1 - i)) & 1u ? -1 : 1;
            prod *= s[static_cast<size_t>(i)];
        }
        if (prod == w.sign()) {
            return SignedPermutation(w.perm(), std::move(s));
        }
    }
    throw std::logic_error("no lift found");
}

SignVector conjugate_C_by_W(const WeylElement& w, const SignVector& c) {
    std::vector<int> s(static_cast<size_t>(c.dim()));
    for (int j = 0; j < c.dim(); ++j) {
        s[static_cast<size_t>(w(j))] = c[j];
    }
    return SignVector(std::move(s));
}

}  // namespace flagdyn
