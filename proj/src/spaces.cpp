#include "flagdyn/spaces.hpp"

#include "flagdyn/errors.hpp"

#include <cmath>

namespace flagdyn {

PointOnK PointOnK::checked(Matrix rot) {
    if (!is_special_orthogonal(rot, 1e-10)) {
        throw InvalidGroupElementError("point is not in SO(n)");
    }
    return PointOnK{std::move(rot)};
}

ProjPoint ProjPoint::from_vector(const Vector& v) {
    const double nrm = v.norm();
    if (!(nrm > 0.0)) {
        throw NumericalRankError("zero vector has no direction");
    }
    Vector d = v / nrm;
    canonicalize_sign(d);
    return ProjPoint{std::move(d)};
}

void canonicalize_frame(Eigen::Ref<Matrix> k) {
    const Eigen::Index n = k.cols();
    int flips = 0;
    Eigen::Index weakest = 0;
    double weakest_max = 2.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            if (std::abs(k(i, j)) > std::abs(k(best, j))) {
                best = i;
            }
        }
        const double mag = std::abs(k(best, j));
        if (k(best, j) < 0.0) {
            k.col(j) = -k.col(j);
            ++flips;
        }
        if (mag < weakest_max) {
            weakest_max = mag;
            weakest = j;
        }
    }
    if (flips % 2 == 1) {
        k.col(weakest) = -k.col(weakest);
    }
}

}  // namespace flagdyn
