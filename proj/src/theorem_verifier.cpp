#include "flagdyn/theorem_verifier.hpp"

#include "flagdyn/errors.hpp"
#include "flagdyn/k_action.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace flagdyn {

namespace {

Matrix point_matrix(const SampleCloud& c, size_t i) { return c.point(i); }

Matrix translate(const Matrix& k, const SignVector& m) {
    Matrix t = k;
    for (int j = 0; j < m.dim(); ++j) {
        if (m[j] < 0) {
            t.col(j) = -t.col(j);
        }
    }
    return t;
}

// record id per core sample, -1 elsewhere
std::vector<int> core_membership(const std::vector<ControlSetRecord>& records, size_t n) {
    std::vector<int> out(n, -1);
    for (const auto& r : records) {
        for (int32_t i : r.core_indices) {
            out[static_cast<size_t>(i)] = r.id;
        }
    }
    return out;
}

std::vector<int32_t> complement(const std::vector<int32_t>& sorted_subset, size_t n) {
    std::vector<int32_t> out;
    for (size_t i = 0; i < n; ++i) {
        if (!std::binary_search(sorted_subset.begin(), sorted_subset.end(), static_cast<int32_t>(i))) {
            out.push_back(static_cast<int32_t>(i));
        }
    }
    return out;
}

// plurality flag record under which the core of each K record projects
std::vector<int> flag_record_over(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                  const std::vector<int32_t>& image_of) {
    const std::vector<int> flag_member = membership(flag_run.records, flag_run.graph.size());
    std::vector<int> out;
    for (const auto& r : k_run.records) {
        std::vector<int> tally(flag_run.records.size(), 0);
        for (int32_t i : r.core_indices) {
            const int f = flag_member[static_cast<size_t>(image_of[static_cast<size_t>(i)])];
            if (f >= 0) {
                ++tally[static_cast<size_t>(f)];
            }
        }
        if (tally.empty() || *std::max_element(tally.begin(), tally.end()) == 0) {
            out.push_back(-1);
        } else {
            out.push_back(static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin()));
        }
    }
    return out;
}

std::string join_signs(const std::vector<SignVector>& g) {
    std::string s = "{";
    for (size_t i = 0; i < g.size(); ++i) {
        s += (i ? ", " : "") + g[i].to_string();
    }
    return s + "}";
}

}  // namespace

std::vector<WeylElement> compute_WS(const std::vector<ControlSetRecord>& flag_records) {
    const int a = anchor_record(flag_records);
    if (a < 0) {
        throw NotASubgroupError("no invariant flag record carries the identity label");
    }
    std::vector<WeylElement> ws = flag_records[static_cast<size_t>(a)].w_labels;
    std::sort(ws.begin(), ws.end());
    check_subgroup(ws, enumerate_W(ws.front().dim()));
    return ws;
}

TranslationMatcher::TranslationMatcher(const ControlSetRun& k_run)
    : run_(k_run), all_(k_run.graph.cloud), member_of_(membership(k_run.records, k_run.graph.size())) {}

std::vector<int32_t> TranslationMatcher::interior(int record, double collar) const {
    const auto& r = run_.records.at(static_cast<size_t>(record));
    if (collar <= 0.0) {
        return r.core_indices;
    }
    const SampleCloud& cloud = run_.graph.cloud;
    const CloudMetric outside(cloud, complement(r.member_indices, cloud.size()));
    std::vector<int32_t> out;
    for (int32_t i : r.core_indices) {
        const auto m = outside.nearest(point_matrix(cloud, static_cast<size_t>(i)));
        if (m.index < 0 || m.dist > collar) {
            out.push_back(i);
        }
    }
    return out;
}

TranslationMatch TranslationMatcher::match(int record, const SignVector& m, double collar) const {
    const SampleCloud& cloud = run_.graph.cloud;
    const std::vector<int32_t> pts = interior(record, collar);
    std::vector<size_t> tally(run_.records.size(), 0);
    for (int32_t i : pts) {
        const auto hit = all_.nearest(translate(point_matrix(cloud, static_cast<size_t>(i)), m));
        if (hit.index >= 0 && hit.dist <= run_.graph.epsilon) {
            const int r = member_of_[static_cast<size_t>(hit.index)];
            if (r >= 0) {
                ++tally[static_cast<size_t>(r)];
            }
        }
    }
    TranslationMatch out;
    out.tested = pts.size();
    if (pts.empty() || tally.empty()) {
        return out;
    }
    const auto best = std::max_element(tally.begin(), tally.end());
    out.target = static_cast<int>(best - tally.begin());
    out.mismatch = 1.0 - static_cast<double>(*best) / static_cast<double>(pts.size());
    return out;
}

std::vector<SignVector> stabilizer_in_M(const ControlSetRun& k_run, int record) {
    const TranslationMatcher matcher(k_run);
    std::vector<SignVector> out;
    for (const SignVector& m : enumerate_M(k_run.graph.cloud.n)) {
        if (matcher.match(record, m, 0.0).target == record) {
            out.push_back(m);
        }
    }
    check_subgroup(out, enumerate_M(k_run.graph.cloud.n));
    return out;
}

std::vector<SignVector> compute_CS(const ControlSetRun& k_run) {
    const int a = anchor_record(k_run.records);
    if (a < 0) {
        throw NotASubgroupError("no invariant K record carries an identity label");
    }
    return stabilizer_in_M(k_run, a);
}

VerificationReport verify_counting(const ControlSetRun& k_run, const ControlSetRun& flag_run) {
    VerificationReport rep{"counting", false, static_cast<double>(k_run.records.size()), 0.0, ""};
    const int n = k_run.graph.cloud.n;
    try {
        const auto cs = compute_CS(k_run);
        const auto ws = compute_WS(flag_run.records);
        const size_t c_index = right_cosets(cs, enumerate_M(n)).size();
        const size_t w_index = right_cosets(ws, enumerate_W(n)).size();
        rep.rhs = static_cast<double>(c_index * w_index);
        rep.passed = k_run.records.size() == c_index * w_index;
        std::ostringstream os;
        os << k_run.records.size() << " control sets on K; |C(S)\\C| = " << c_index << ", |W(S)\\W| = " << w_index
           << "; C(S) = " << join_signs(cs) << ", |W(S)| = " << ws.size();
        rep.details = os.str();
    } catch (const Error& e) {
        rep.details = e.what();
    }
    return rep;
}

VerificationReport verify_fiber_unions(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                       const std::vector<int32_t>& image_of, double k_collar, double flag_collar) {
    VerificationReport rep{"fiber-unions", false, 0.0, 0.01, ""};
    std::ostringstream os;
    const SampleCloud& kc = k_run.graph.cloud;
    const SampleCloud& fc = flag_run.graph.cloud;
    const int n = kc.n;
    const auto over = flag_record_over(k_run, flag_run, image_of);
    const std::vector<int> flag_member = membership(flag_run.records, fc.size());
    const std::vector<int> flag_core = core_membership(flag_run.records, fc.size());
    const std::vector<int> k_member = membership(k_run.records, kc.size());
    const TranslationMatcher matcher(k_run);
    const CloudMetric kmetric(kc);
    const auto M = enumerate_M(n);
    bool ok = !flag_run.records.empty();
    double worst = 0.0;
    for (const auto& f : flag_run.records) {
        std::vector<int> ks;
        for (size_t r = 0; r < over.size(); ++r) {
            if (over[r] == f.id) {
                ks.push_back(static_cast<int>(r));
            }
        }
        os << "flag " << f.id << ": " << ks.size() << " K sets";
        if (ks.empty()) {
            os << " (none); ";
            ok = false;
            continue;
        }
        const int d = ks.front();
        const size_t expected = M.size() / stabilizer_in_M(k_run, d).size();
        os << " (expected " << expected << ")";
        ok = ok && ks.size() == expected;

        // D_0 m lands over F
        size_t fwd_bad = 0;
        size_t fwd_total = 0;
        for (int32_t i : matcher.interior(d, k_collar)) {
            for (const SignVector& m : M) {
                const auto hit = kmetric.nearest(translate(point_matrix(kc, static_cast<size_t>(i)), m));
                ++fwd_total;
                if (hit.index < 0 || hit.dist > k_run.graph.epsilon ||
                    flag_member[static_cast<size_t>(image_of[static_cast<size_t>(hit.index)])] != f.id) {
                    ++fwd_bad;
                }
            }
        }
        // points over the interior of F_0 lie in some D m
        const CloudMetric outside(fc, complement(f.member_indices, fc.size()));
        size_t back_bad = 0;
        size_t back_total = 0;
        for (size_t a = 0; a < kc.size(); ++a) {
            const auto fa = static_cast<size_t>(image_of[a]);
            if (flag_core[fa] != f.id) {
                continue;
            }
            if (flag_collar > 0.0) {
                const auto e = outside.nearest(point_matrix(fc, fa));
                if (e.index >= 0 && e.dist <= flag_collar) {
                    continue;
                }
            }
            ++back_total;
            bool found = false;
            for (const SignVector& m : M) {
                const auto hit = kmetric.nearest(translate(point_matrix(kc, a), m));
                if (hit.index >= 0 && hit.dist <= k_run.graph.epsilon && k_member[static_cast<size_t>(hit.index)] == d) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                ++back_bad;
            }
        }
        const double fwd = fwd_total ? static_cast<double>(fwd_bad) / static_cast<double>(fwd_total) : 1.0;
        const double back = back_total ? static_cast<double>(back_bad) / static_cast<double>(back_total) : 1.0;
        worst = std::max({worst, fwd, back});
        os << ", union mismatch " << fwd << " / " << back << " on " << fwd_total << " / " << back_total
           << " points; ";
    }
    rep.lhs = worst;
    rep.passed = ok && worst < 0.01;
    rep.details = os.str();
    return rep;
}

VerificationReport verify_conjugacy_CSw(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                        const std::vector<int32_t>& image_of) {
    VerificationReport rep{"conjugacy", false, 0.0, 0.0, ""};
    std::ostringstream os;
    try {
        const auto cs = compute_CS(k_run);
        const auto over = flag_record_over(k_run, flag_run, image_of);
        size_t good = 0;
        size_t total = 0;
        for (const auto& f : flag_run.records) {
            std::vector<std::vector<SignVector>> stabs;
            for (size_t r = 0; r < over.size(); ++r) {
                if (over[r] == f.id) {
                    stabs.push_back(stabilizer_in_M(k_run, static_cast<int>(r)));
                }
            }
            if (stabs.empty()) {
                os << "flag " << f.id << ": no K set over it; ";
                total += std::max<size_t>(1, f.w_labels.size());
                continue;
            }
            const bool same = std::all_of(stabs.begin(), stabs.end(), [&](const auto& s) { return s == stabs.front(); });
            os << "flag " << f.id << ": C(S,w) = " << join_signs(stabs.front()) << (same ? "" : " (differs across K sets)");
            for (const WeylElement& w : f.w_labels) {
                std::vector<SignVector> expected;
                for (const SignVector& c : cs) {
                    expected.push_back(conjugate_C_by_W(w.inverse(), c));
                }
                std::sort(expected.begin(), expected.end());
                ++total;
                if (same && expected == stabs.front()) {
                    ++good;
                } else {
                    os << " [w = " << w.to_string() << " expects " << join_signs(expected) << "]";
                }
            }
            os << "; ";
        }
        rep.lhs = static_cast<double>(good);
        rep.rhs = static_cast<double>(total);
        rep.passed = total > 0 && good == total;
    } catch (const Error& e) {
        os << e.what();
    }
    rep.details = os.str();
    return rep;
}

VerificationReport verify_pi_compatibility(const ControlSetRun& k_run, const ControlSetRun& flag_run,
                                           const std::vector<int32_t>& image_of, double k_collar) {
    VerificationReport rep{"pi-compatibility", false, 0.0, 0.01, ""};
    std::ostringstream os;
    const std::vector<int> flag_core = core_membership(flag_run.records, flag_run.graph.size());
    const TranslationMatcher matcher(k_run);
    bool ok = !k_run.records.empty();
    double worst = 0.0;
    for (const auto& r : k_run.records) {
        const auto pts = matcher.interior(r.id, k_collar);
        std::vector<size_t> tally(flag_run.records.size(), 0);
        for (int32_t i : pts) {
            const int f = flag_core[static_cast<size_t>(image_of[static_cast<size_t>(i)])];
            if (f >= 0) {
                ++tally[static_cast<size_t>(f)];
            }
        }
        if (pts.empty() || tally.empty()) {
            os << "K " << r.id << ": no points outside the collar; ";
            ok = false;
            continue;
        }
        const auto best = std::max_element(tally.begin(), tally.end());
        const double mis = 1.0 - static_cast<double>(*best) / static_cast<double>(pts.size());
        worst = std::max(worst, mis);
        os << "K " << r.id << " -> flag " << (best - tally.begin()) << " mismatch " << mis << " on " << pts.size()
           << "; ";
    }
    rep.lhs = worst;
    rep.passed = ok && worst < 0.01;
    rep.details = os.str();
    return rep;
}

VerificationReport verify_right_translation_covariance(const ControlSetRun& k_run, double collar) {
    VerificationReport rep{"right-translation", false, 0.0, 0.01, ""};
    std::ostringstream os;
    const TranslationMatcher matcher(k_run);
    bool ok = !k_run.records.empty();
    double worst = 0.0;
    // D(u) m = D(um)
    std::map<SignedPermutation, int> label_record;
    for (const auto& r : k_run.records) {
        for (const auto& u : r.u_labels) {
            label_record[u] = r.id;
        }
    }
    for (const SignVector& m : enumerate_M(k_run.graph.cloud.n)) {
        std::vector<int> targets;
        os << "m = " << m.to_string() << ":";
        for (const auto& r : k_run.records) {
            const auto t = matcher.match(r.id, m, collar);
            if (t.tested == 0) {
                ok = false;
                os << " " << r.id << "->(no points outside the collar)";
                continue;
            }
            targets.push_back(t.target);
            worst = std::max(worst, t.mismatch);
            os << " " << r.id << "->" << t.target << " (" << t.mismatch << ")";
            for (const auto& u : r.u_labels) {
                const auto it = label_record.find(u * SignedPermutation::from_signs(m));
                if (it == label_record.end() || it->second != t.target) {
                    ok = false;
                    os << " [label " << u.to_string() << " not carried to " << t.target << "]";
                }
            }
        }
        std::vector<int> sorted = targets;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            ok = false;
            os << " [targets collide]";
        }
        os << "; ";
    }
    rep.lhs = worst;
    rep.passed = ok && worst < 0.01;
    rep.details = os.str();
    return rep;
}

std::pair<Matrix, Matrix> factor_lower_upper(const Matrix& nu) {
    const Eigen::Index n = nu.rows();
    Matrix lower = Matrix::Identity(n, n);
    Matrix upper = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            upper(i, j) = nu(i, j) - lower.row(i).head(i).dot(upper.col(j).head(i));
        }
        if (std::abs(upper(i, i)) < 1e-14) {
            throw FactorizationError("vanishing pivot in lower-upper factorization");
        }
        for (Eigen::Index r = i + 1; r < n; ++r) {
            lower(r, i) = (nu(r, i) - lower.row(r).head(i).dot(upper.col(i).head(i))) / upper(i, i);
        }
    }
    return {lower, upper};
}

VerificationReport verify_nu_decomposition(const SignedPermutation& u, int samples, uint64_t seed) {
    VerificationReport rep{"nu-decomposition", false, 0.0, 1e-10, ""};
    const int n = u.dim();
    const Matrix um = u.matrix();
    const std::vector<int> inv = u.inverse().perm();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    double worst_recon = 0.0;
    double worst_pattern = 0.0;
    double worst_diag = 0.0;
    for (int s = 0; s < samples; ++s) {
        Matrix nmat = Matrix::Identity(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                nmat(i, j) = unif(rng);
            }
        }
        const Matrix nu = um * nmat * um.transpose();
        const auto [lower, upper] = factor_lower_upper(nu);
        worst_recon = std::max(worst_recon, (lower * upper - nu).norm() / nu.norm());
        for (int a = 0; a < n; ++a) {
            worst_diag = std::max(worst_diag, std::abs(upper(a, a) - 1.0));
            for (int b = 0; b < n; ++b) {
                // u N u^-1 has support where the preimages are ordered
                const bool allowed = inv[static_cast<size_t>(a)] < inv[static_cast<size_t>(b)];
                if (a > b && !allowed) {
                    worst_pattern = std::max(worst_pattern, std::abs(lower(a, b)));
                }
                if (a < b && !allowed) {
                    worst_pattern = std::max(worst_pattern, std::abs(upper(a, b)));
                }
            }
        }
    }
    rep.lhs = worst_recon;
    rep.passed = samples > 0 && worst_recon <= 1e-10 && worst_pattern <= 1e-12 && worst_diag <= 1e-12;
    std::ostringstream os;
    os << "u = " << u.to_string() << ", " << samples << " samples: reconstruction " << worst_recon
       << ", largest entry outside the pattern " << worst_pattern << ", largest diagonal defect " << worst_diag;
    rep.details = os.str();
    return rep;
}

VerificationReport verify_transitivity_fixed_points(const ControlSetRun& k_run, const GeneratorSet& gens,
                                                    int trials, uint64_t seed, int max_length) {
    VerificationReport rep{"transitivity-fixed-points", false, 0.0, 0.0, ""};
    std::ostringstream os;
    const auto& records = k_run.records;
    if (records.empty() || gens.gens.empty() || max_length < 1) {
        rep.details = "nothing to check";
        return rep;
    }
    std::map<SignedPermutation, int> label_record;
    for (const auto& r : records) {
        for (const auto& u : r.u_labels) {
            label_record[u] = r.id;
        }
    }
    std::vector<CloudMetric> cores;
    for (const auto& r : records) {
        cores.emplace_back(k_run.graph.cloud, r.core_indices);
    }
    const double eps = k_run.graph.epsilon;
    const CoreLocator locator(k_run.graph, records);
    const size_t mstar = enumerate_Mstar(k_run.graph.cloud.n).size();
    const bool even = mstar % records.size() == 0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> len_dist(1, max_length);
    std::uniform_int_distribution<int> letter_dist(0, static_cast<int>(gens.gens.size()) - 1);
    std::set<std::vector<int>> seen;
    std::vector<std::vector<std::pair<SignedPermutation, Matrix>>> hits(records.size());
    size_t counter = 0;
    std::vector<std::string> examples;
    int found = 0;
    for (long attempt = 0; found < trials && attempt < 1000L * std::max(1, trials); ++attempt) {
        std::vector<int> letters(static_cast<size_t>(len_dist(rng)));
        for (int& l : letters) {
            l = letter_dist(rng);
        }
        if (!seen.insert(letters).second) {
            continue;
        }
        GroupElement h = gens.gens[static_cast<size_t>(letters.front())];
        for (size_t i = 1; i < letters.size(); ++i) {
            h = h * gens.gens[static_cast<size_t>(letters[i])];
        }
        if (!is_regular_positive(h)) {
            continue;
        }
        ++found;
        std::vector<size_t> per_record(records.size(), 0);
        for (const auto& f : fixed_points_on_K(h)) {
            const auto want = label_record.find(f.u_label);
            const int expected = want == label_record.end() ? -1 : want->second;
            const bool inside = expected >= 0 && [&] {
                const auto m = cores[static_cast<size_t>(expected)].nearest(f.point.rot);
                return m.index >= 0 && m.dist <= eps;
            }();
            // a point within epsilon of its own core counts there; others go to the nearest core
            const int r = inside ? expected : locator.locate(f.point.rot);
            if (r >= 0) {
                ++per_record[static_cast<size_t>(r)];
                if (inside) {
                    hits[static_cast<size_t>(r)].emplace_back(f.u_label, f.point.rot);
                }
            }
            if (!inside) {
                ++counter;
                if (examples.size() < 10) {
                    std::ostringstream e;
                    e << "word of length " << letters.size() << ": type " << f.u_label.to_string()
                      << " not within epsilon of the core of record " << expected;
                    examples.push_back(e.str());
                }
            }
        }
        if (even) {
            for (size_t r = 0; r < records.size(); ++r) {
                if (per_record[r] != mstar / records.size()) {
                    ++counter;
                    if (examples.size() < 10) {
                        examples.push_back("record " + std::to_string(r) + " received " +
                                           std::to_string(per_record[r]) + " fixed points");
                    }
                }
            }
        }
    }
    // converse coverage: core samples near a tested fixed point of a matching type
    size_t covered = 0;
    size_t core_total = 0;
    const SampleCloud& cloud = k_run.graph.cloud;
    for (const auto& r : records) {
        for (int32_t i : r.core_indices) {
            ++core_total;
            const Matrix k = cloud.point(static_cast<size_t>(i));
            for (const auto& [u, rot] : hits[static_cast<size_t>(r.id)]) {
                if (std::find(r.u_labels.begin(), r.u_labels.end(), u) != r.u_labels.end() &&
                    (rot - k).norm() <= eps) {
                    ++covered;
                    break;
                }
            }
        }
    }
    rep.lhs = static_cast<double>(counter);
    rep.passed = found == trials && counter == 0;
    os << found << " regular words (of " << trials << " requested), " << counter << " counterexamples";
    for (const auto& e : examples) {
        os << "; " << e;
    }
    os << "; core coverage by tested fixed points " << (core_total ? static_cast<double>(covered) / core_total : 0.0);
    rep.details = os.str();
    return rep;
}

}  // namespace flagdyn
