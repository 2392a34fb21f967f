#pragma once

// Action of SL(n,R) on projective space and on the maximal flag manifold,
// with the fixed points of a regular element typed by W.

#include "flagdyn/linalg_core.hpp"
#include "flagdyn/spaces.hpp"
#include "flagdyn/weyl_structs.hpp"

#include <utility>
#include <vector>

namespace flagdyn {

ProjPoint act_on_projective(const GroupElement& g, const ProjPoint& p);

FlagPoint act_on_flag(const GroupElement& g, const FlagPoint& f);

/// n! points pi(kappa(g u_w)), one per w in enumerate_W order. The w = id
/// point is the attractor.
std::vector<std::pair<WeylElement, FlagPoint>> fixed_points_on_flag(const GroupElement& h,
                                                                    double tol = kDefaultRegularityTol);

/// The n eigenlines of h. The line of the i-th largest eigenvalue is labeled by
/// the transposition (1 i), or the identity for i = 1: it is the first vector
/// of every flag fixed point whose type sends 1 to i.
std::vector<std::pair<WeylElement, ProjPoint>> fixed_points_on_projective(const GroupElement& h,
                                                                          double tol = kDefaultRegularityTol);

/// min over m in M of ||a - b m||_F.
double flag_distance(const FlagPoint& a, const FlagPoint& b);

/// sqrt(2 - 2|<a,b>|), the chordal distance between lines.
double proj_distance(const ProjPoint& a, const ProjPoint& b);

}  // namespace flagdyn
