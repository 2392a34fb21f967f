#include "flagdyn/k_action.hpp"

#include "flagdyn/errors.hpp"

#include <sstream>

namespace flagdyn {

PointOnK act_on_K(const GroupElement& g, const PointOnK& k) {
    Matrix m = g.matrix() * k.rot;
    orthonormalize_columns(m);
    return PointOnK{std::move(m)};
}

PointOnK right_translate(const PointOnK& k, const SignVector& m) {
    Matrix r = k.rot;
    for (int j = 0; j < m.dim(); ++j) {
        if (m[j] < 0) {
            r.col(j) = -r.col(j);
        }
    }
    return PointOnK{std::move(r)};
}

FlagPoint project_to_flag(const PointOnK& k) {
    Matrix f = k.rot;
    canonicalize_frame(f);
    return FlagPoint{std::move(f)};
}

std::vector<FixedPointOnK> fixed_points_on_K(const RegularSplit& split) {
    const GroupElement& g = split.conjugator;
    std::vector<FixedPointOnK> out;
    for (const SignedPermutation& u : enumerate_Mstar(g.dim())) {
        Matrix k = g.matrix() * u.matrix();
        orthonormalize_columns(k);
        out.push_back(FixedPointOnK{PointOnK{std::move(k)}, u, split});
    }
    return out;
}

std::vector<FixedPointOnK> fixed_points_on_K(const GroupElement& h, double tol) {
    return fixed_points_on_K(regular_split_decompose(h, tol));
}

std::pair<FixedPointOnK, int> iterate_to_attractor(const GroupElement& h, const PointOnK& k0, int max_steps,
                                                   double tol) {
    const std::vector<FixedPointOnK> fixed = fixed_points_on_K(h);
    PointOnK k = k0;
    for (int step = 0; step <= max_steps; ++step) {
        const FixedPointOnK* hit = nullptr;
        for (const FixedPointOnK& f : fixed) {
            if ((f.point.rot - k.rot).norm() <= tol) {
                if (hit != nullptr) {
                    throw NoConvergenceError("iterate is within tolerance of two fixed points");
                }
                hit = &f;
            }
        }
        if (hit != nullptr) {
            return {*hit, step};
        }
        k = act_on_K(h, k);
    }
    std::ostringstream os;
    os << "no fixed point reached after " << max_steps << " steps";
    throw NoConvergenceError(os.str());
}

}  // namespace flagdyn
