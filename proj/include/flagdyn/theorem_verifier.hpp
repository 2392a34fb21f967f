#pragma once

// Checks of the structure theorems on computed control sets: the subgroups
// W(S) and C(S), the counting formula, fibers of pi over flag control sets,
// conjugacy of the C(S,w), the factorization of N_u, and the fixed-point
// description of transitivity sets.

#include "flagdyn/semigroup_engine.hpp"
#include "flagdyn/weyl_structs.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace flagdyn {

struct VerificationReport {
    std::string theorem_tag;
    bool passed = false;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string details;
};

/// W(S): the labels of the invariant flag record carrying w = id. Accepts
/// FLAG records, or PROJ records when n = 2. Throws NotASubgroupError when
/// the labels do not form a subgroup of W (or no such record exists).
std::vector<WeylElement> compute_WS(const std::vector<ControlSetRecord>& flag_records);

/// Right translation of a record's core by m, matched against the cloud.
struct TranslationMatch {
    int target = -1;        ///< record receiving most translated points
    double mismatch = 1.0;  ///< fraction of tested points not landing in target's members
    size_t tested = 0;      ///< core points outside the collar
};

/// Matches right-translated cores of the records of a K run. Only core points
/// farther than `collar` from every non-member sample are tested; collar 0
/// tests the whole core.
class TranslationMatcher {
public:
    explicit TranslationMatcher(const ControlSetRun& k_run);
    [[nodiscard]] TranslationMatch match(int record, const SignVector& m, double collar) const;
    /// Core points of `record` farther than collar from its complement.
    [[nodiscard]] std::vector<int32_t> interior(int record, double collar) const;

private:
    const ControlSetRun& run_;
    CloudMetric all_;
    std::vector<int> member_of_;
};

/// {m in M : D m = D} for the record D, decided by the plurality target of
/// the whole translated core. Throws NotASubgroupError if not a subgroup.
std::vector<SignVector> stabilizer_in_M(const ControlSetRun& k_run, int record);

/// C(S): stabilizer_in_M of the anchor record. Throws NotASubgroupError when
/// there is no anchor or the stabilizer is not a subgroup.
std::vector<SignVector> compute_CS(const ControlSetRun& k_run);

/// |K records| = |C(S)\C| * |W(S)\W|, exact.
VerificationReport verify_counting(const ControlSetRun& k_run, const ControlSetRun& flag_run);

/// For every flag record F: the number of K records whose cores project into
/// F equals |C(S,w)\C|, and pi^-1(F_0) agrees with the union of the
/// M-translates of one K core over F up to the collar, with mismatch < 1%.
/// image_of maps K samples to flag samples (project_cloud).
VerificationReport verify_fiber_unions(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                       const std::vector<int32_t>& image_of, double k_collar, double flag_collar);

/// C(S,w) = w^-1 C(S) w for every label w of every flag record, with C(S,w)
/// the stabilizer of a K record over that flag record.
VerificationReport verify_conjugacy_CSw(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                        const std::vector<int32_t>& image_of);

/// pi(D_0) lies in the core of one flag record for every K record D, with
/// mismatch < 1% among core points outside the collar.
VerificationReport verify_pi_compatibility(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                           const std::vector<int32_t>& image_of, double k_collar);

/// For every record and every m in M, the translated core lands in one record
/// with mismatch < 1% among core points outside the collar, the targets
/// permute the records, and the record labeled u goes to the one labeled um.
VerificationReport verify_right_translation_covariance(const ControlSetRun& k_run, double collar);

/// nu = nu_minus * nu_plus with nu_minus unit lower triangular and nu_plus
/// unit upper triangular (LU without pivoting). Throws FactorizationError on
/// a vanishing pivot.
std::pair<Matrix, Matrix> factor_lower_upper(const Matrix& nu);

/// Samples nu = u n u^-1 with n unit upper triangular, entries uniform on
/// [-2, 2], factors it and checks reconstruction (1e-10 relative) and that
/// both factors vanish (1e-12) outside the pattern of u N u^-1.
VerificationReport verify_nu_decomposition(const SignedPermutation& u, int samples, uint64_t seed);

/// Draws `trials` distinct regular-positive random words of length
/// 1..max_length and checks that every typed fixed point lands in the core
/// of the record carrying its label, and that each record receives
/// |M*| / #records fixed points per word. The details also report which
/// fraction of core samples lies within epsilon of a tested fixed point of a
/// matching type.
VerificationReport verify_transitivity_fixed_points(const ControlSetRun& k_run, const GeneratorSet& gens,
                                                    int trials, uint64_t seed, int max_length);

}  // namespace flagdyn
