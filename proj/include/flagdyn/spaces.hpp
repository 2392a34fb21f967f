#pragma once

// Point types for SO(n), the maximal flag manifold K/M and projective space.

#include "flagdyn/linalg_core.hpp"

namespace flagdyn {

/// A rotation in SO(n).
struct PointOnK {
    Matrix rot;

    /// Throws InvalidGroupElementError unless rot is orthogonal within 1e-10
    /// with positive determinant.
    static PointOnK checked(Matrix rot);
};

/// A point of K/M stored as its canonical coset representative.
struct FlagPoint {
    Matrix frame;
};

/// A line in R^n stored as a unit vector with largest-magnitude entry positive.
struct ProjPoint {
    Vector dir;

    /// Normalizes and canonicalizes v. Throws NumericalRankError on a zero vector.
    static ProjPoint from_vector(const Vector& v);
};

/// Canonical M-coset representative of k: every column gets its
/// largest-magnitude entry positive; if that leaves det = -1, the column with
/// the smallest such maximum is negated back.
void canonicalize_frame(Eigen::Ref<Matrix> k);

}  // namespace flagdyn
