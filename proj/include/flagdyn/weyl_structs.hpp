#pragma once

// The finite groups attached to the diagonal subgroup of SL(n,R):
// M (det-1 sign diagonals), M* (det-1 signed permutations) and W = M*/M.
// M0 is trivial here, so the canonical groups are U = M* and C = M.
//
// Permutations are stored 0-based in one-line notation: perm[j] is the image
// of j. A signed permutation u acts as u e_j = signs[perm[j]] e_{perm[j]},
// i.e. u = diag(signs) * P with P e_j = e_{perm[j]}.

#include "flagdyn/errors.hpp"
#include "flagdyn/linalg_core.hpp"

#include <algorithm>
#include <compare>
#include <string>
#include <vector>

namespace flagdyn {

namespace detail {
// lexicographic with + sorting before -
inline std::strong_ordering compare_signs(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end(),
                                                  [](int x, int y) { return y <=> x; });
}
}  // namespace detail

class WeylElement {
public:
    explicit WeylElement(std::vector<int> perm);
    static WeylElement identity(int n);
    /// Transposition of the 0-based indices i and j.
    static WeylElement transposition(int n, int i, int j);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(perm_.size()); }
    [[nodiscard]] const std::vector<int>& perm() const noexcept { return perm_; }
    [[nodiscard]] int operator()(int j) const { return perm_[static_cast<size_t>(j)]; }
    [[nodiscard]] bool is_identity() const;

    [[nodiscard]] WeylElement operator*(const WeylElement& rhs) const;
    [[nodiscard]] WeylElement inverse() const;
    [[nodiscard]] int sign() const;
    /// Permutation matrix P with P e_j = e_{perm[j]}.
    [[nodiscard]] Matrix matrix() const;
    /// 1-based cycle notation without fixed points, e.g. "(1 2)"; identity is "id".
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const WeylElement&, const WeylElement&) = default;
    friend auto operator<=>(const WeylElement& a, const WeylElement& b) { return a.perm_ <=> b.perm_; }

private:
    std::vector<int> perm_;
};

class SignVector {
public:
    /// Throws std::invalid_argument unless every entry is +-1 with product +1.
    explicit SignVector(std::vector<int> signs);
    static SignVector identity(int n);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(signs_.size()); }
    [[nodiscard]] const std::vector<int>& signs() const noexcept { return signs_; }
    [[nodiscard]] int operator[](int i) const { return signs_[static_cast<size_t>(i)]; }
    [[nodiscard]] bool is_identity() const;

    [[nodiscard]] SignVector operator*(const SignVector& rhs) const;
    [[nodiscard]] SignVector inverse() const { return *this; }
    [[nodiscard]] Matrix matrix() const;
    /// e.g. "(+,-,-)"
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const SignVector&, const SignVector&) = default;
    friend auto operator<=>(const SignVector& a, const SignVector& b) {
        return detail::compare_signs(a.signs_, b.signs_);
    }

private:
    std::vector<int> signs_;
};

class SignedPermutation {
public:
    /// Throws std::invalid_argument if perm is not a permutation, a sign is not
    /// +-1, or the determinant is -1.
    SignedPermutation(std::vector<int> perm, std::vector<int> signs);
    static SignedPermutation identity(int n);
    /// Embeds an element of M (trivial permutation).
    static SignedPermutation from_signs(const SignVector& c);
    /// Reads an exact signed-permutation matrix; entries must be within tol of
    /// 0 or +-1. Throws std::invalid_argument otherwise.
    static SignedPermutation from_matrix(const Matrix& m, double tol = 1e-9);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(perm_.size()); }
    [[nodiscard]] const std::vector<int>& perm() const noexcept { return perm_; }
    [[nodiscard]] const std::vector<int>& signs() const noexcept { return signs_; }
    [[nodiscard]] bool is_identity() const;

    [[nodiscard]] SignedPermutation operator*(const SignedPermutation& rhs) const;
    [[nodiscard]] SignedPermutation inverse() const;
    [[nodiscard]] Matrix matrix() const;
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
    friend auto operator<=>(const SignedPermutation& a, const SignedPermutation& b) {
        if (auto c = a.perm_ <=> b.perm_; c != 0) {
            return c;
        }
        return detail::compare_signs(a.signs_, b.signs_);
    }

private:
    std::vector<int> perm_;
    std::vector<int> signs_;
};

/// All 2^(n-1) sign vectors of product +1, in lexicographic order (+ first).
std::vector<SignVector> enumerate_M(int n);

/// All 2^(n-1) n! det-1 signed permutations, ordered by (perm, signs).
std::vector<SignedPermutation> enumerate_Mstar(int n);

/// All n! permutations in lexicographic one-line order.
std::vector<WeylElement> enumerate_W(int n);

/// The permutation by which Ad(u) permutes diagonal entries.
WeylElement weyl_class(const SignedPermutation& u);

/// The least element of M* over w (in enumerate_Mstar order).
SignedPermutation weyl_lift(const WeylElement& w);

/// w c w^-1: the sign of coordinate j moves to coordinate w(j).
SignVector conjugate_C_by_W(const WeylElement& w, const SignVector& c);

template <class T>
struct CosetTable {
    std::vector<T> subgroup;
    /// cosets[i] lists the elements of subgroup * representatives[i], in
    /// group enumeration order.
    std::vector<std::vector<T>> cosets;
    std::vector<T> representatives;

    [[nodiscard]] size_t size() const noexcept { return cosets.size(); }

    /// Index of the coset containing g, or size() if g is absent.
    [[nodiscard]] size_t coset_of(const T& g) const {
        for (size_t i = 0; i < cosets.size(); ++i) {
            if (std::find(cosets[i].begin(), cosets[i].end(), g) != cosets[i].end()) {
                return i;
            }
        }
        return cosets.size();
    }
};

/// Throws NotASubgroupError unless `subgroup` is a subgroup of `group`.
template <class T>
void check_subgroup(const std::vector<T>& subgroup, const std::vector<T>& group) {
    auto in = [](const std::vector<T>& set, const T& g) { return std::find(set.begin(), set.end(), g) != set.end(); };
    if (subgroup.empty()) {
        throw NotASubgroupError("empty subset");
    }
    for (const T& a : subgroup) {
        if (!in(group, a)) {
            throw NotASubgroupError("element " + a.to_string() + " is not in the group");
        }
        if (!in(subgroup, a.inverse())) {
            throw NotASubgroupError("not closed under inverses at " + a.to_string());
        }
        for (const T& b : subgroup) {
            if (!in(subgroup, a * b)) {
                throw NotASubgroupError("not closed under products at " + a.to_string() + " * " + b.to_string());
            }
        }
    }
}

/// Partition of `group` into right cosets H g. Representatives are the least
/// members of each coset in the order of `group`, and cosets are listed in
/// order of their representatives.
template <class T>
CosetTable<T> right_cosets(const std::vector<T>& subgroup, const std::vector<T>& group) {
    check_subgroup(subgroup, group);
    CosetTable<T> table;
    table.subgroup = subgroup;
    std::vector<bool> used(group.size(), false);
    for (size_t i = 0; i < group.size(); ++i) {
        if (used[i]) {
            continue;
        }
        std::vector<T> coset;
        for (size_t j = i; j < group.size(); ++j) {
            if (used[j]) {
                continue;
            }
            for (const T& h : subgroup) {
                if (h * group[i] == group[j]) {
                    coset.push_back(group[j]);
                    used[j] = true;
                    break;
                }
            }
        }
        table.representatives.push_back(group[i]);
        table.cosets.push_back(std::move(coset));
    }
    return table;
}

}  // namespace flagdyn
