#pragma once

// The action delta(g, k) = kappa(g k) of SL(n,R) on K = SO(n), right
// translation by M, the fiber projection K -> K/M, and the typed fixed points
// kappa(g u) of a regular element with chamber conjugator g.

#include "flagdyn/linalg_core.hpp"
#include "flagdyn/spaces.hpp"
#include "flagdyn/weyl_structs.hpp"

#include <utility>
#include <vector>

namespace flagdyn {

struct FixedPointOnK {
    PointOnK point;
    SignedPermutation u_label;
    RegularSplit chamber;
};

PointOnK act_on_K(const GroupElement& g, const PointOnK& k);

/// k * diag(m).
PointOnK right_translate(const PointOnK& k, const SignVector& m);

FlagPoint project_to_flag(const PointOnK& k);

/// The 2^(n-1) n! points kappa(g u), u in M*, in enumerate_Mstar order, where
/// g is the conjugator of regular_split_decompose(h, tol).
std::vector<FixedPointOnK> fixed_points_on_K(const GroupElement& h, double tol = kDefaultRegularityTol);

/// Same, for an already computed split.
std::vector<FixedPointOnK> fixed_points_on_K(const RegularSplit& split);

/// Iterates k -> delta(h, k) until the iterate is within tol (Frobenius) of a
/// fixed point. Returns that fixed point and the number of steps taken.
/// Throws NoConvergenceError after max_steps, or when the iterate is within
/// tol of two fixed points at once.
std::pair<FixedPointOnK, int> iterate_to_attractor(const GroupElement& h, const PointOnK& k0, int max_steps = 10000,
                                                   double tol = 1e-10);

}  // namespace flagdyn
