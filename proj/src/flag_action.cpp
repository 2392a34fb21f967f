#include "flagdyn/flag_action.hpp"

#include "flagdyn/k_action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flagdyn {

ProjPoint act_on_projective(const GroupElement& g, const ProjPoint& p) {
    return ProjPoint::from_vector(g.matrix() * p.dir);
}

FlagPoint act_on_flag(const GroupElement& g, const FlagPoint& f) {
    return project_to_flag(act_on_K(g, PointOnK{f.frame}));
}

std::vector<std::pair<WeylElement, FlagPoint>> fixed_points_on_flag(const GroupElement& h, double tol) {
    const RegularSplit split = regular_split_decompose(h, tol);
    std::vector<std::pair<WeylElement, FlagPoint>> out;
    for (const WeylElement& w : enumerate_W(h.dim())) {
        Matrix k = split.conjugator.matrix() * weyl_lift(w).matrix();
        orthonormalize_columns(k);
        out.emplace_back(w, project_to_flag(PointOnK{std::move(k)}));
    }
    return out;
}

std::vector<std::pair<WeylElement, ProjPoint>> fixed_points_on_projective(const GroupElement& h, double tol) {
    const RegularSplit split = regular_split_decompose(h, tol);
    const int n = h.dim();
    std::vector<std::pair<WeylElement, ProjPoint>> out;
    for (int i = 0; i < n; ++i) {
        out.emplace_back(WeylElement::transposition(n, 0, i),
                         ProjPoint::from_vector(split.conjugator.matrix().col(i)));
    }
    return out;
}

double flag_distance(const FlagPoint& a, const FlagPoint& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const SignVector& m : enumerate_M(static_cast<int>(a.frame.cols()))) {
        best = std::min(best, (a.frame - b.frame * m.matrix()).norm());
    }
    return best;
}

double proj_distance(const ProjPoint& a, const ProjPoint& b) {
    const double c = std::min(1.0, std::abs(a.dir.dot(b.dir)));
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * c));
}

}  // namespace flagdyn
