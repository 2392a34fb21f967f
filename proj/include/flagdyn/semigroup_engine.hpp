#pragma once

// Discretized reachability for a finitely generated semigroup acting on K,
// the maximal flag manifold or projective space: sample the space, connect
// each sample to the nearest sample of each of its images under generator
// words, and read control sets off the strongly connected components.

#include "flagdyn/linalg_core.hpp"
#include "flagdyn/point_index.hpp"
#include "flagdyn/spaces.hpp"
#include "flagdyn/weyl_structs.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flagdyn {

enum class Space { K, FLAG, PROJ };

std::string to_string(Space s);
/// Accepts "K", "FLAG", "PROJ" (case-insensitive). Throws std::invalid_argument.
Space parse_space(const std::string& s);

struct GeneratorSet {
    std::vector<GroupElement> gens;
    std::string description;
};

/// Presets "slplus2" (n = 2), "slplus3" (n = 3) and "full-group" (n = 2, 3).
/// The positive presets are near-diagonal positive matrices whose attracting
/// eigenlines sit close to the coordinate axes, so the invariant control set
/// on projective space is nearly the whole positive orthant.
/// Throws std::invalid_argument for an unknown name or unsupported n.
GeneratorSet make_preset(const std::string& name, int n);

/// A generator word; letters[0] is applied last.
struct Word {
    GroupElement g;
    std::vector<int> letters;
};

/// All words of length 1..depth, layer by layer, each layer ordered by
/// (first letter, rest of word in previous-layer order).
std::vector<Word> enumerate_words(const GeneratorSet& gens, int depth);

struct SampleCloud {
    Space space = Space::K;
    int n = 0;
    uint64_t seed = 0;
    /// K and FLAG: n x (n * size) with point i in columns [n i, n i + n).
    /// PROJ: n x size.
    Matrix data;

    [[nodiscard]] int block() const noexcept { return space == Space::PROJ ? 1 : n; }
    [[nodiscard]] size_t size() const noexcept {
        return n == 0 ? 0 : static_cast<size_t>(data.cols()) / static_cast<size_t>(block());
    }
    [[nodiscard]] auto point(size_t i) const { return data.middleCols(static_cast<Eigen::Index>(i) * block(), block()); }
};

/// Deterministic sample of `count` points:
///   K, n = 2: equispaced angles 2 pi i / count;
///   K, n = 3: Haar rotations from normalized Gaussian quaternions;
///   K, n = 4: Haar rotations from QR of Gaussian matrices;
///   FLAG: the projection of the K sample, duplicates removed;
///   PROJ, n = 2: equispaced angles pi i / count; n >= 3: first columns of the
///   K sample, duplicates removed.
/// Throws UnsupportedSpaceError for n outside {2, 3, 4}.
SampleCloud sample_space(Space space, int n, int count, uint64_t seed);

struct ProjectedCloud {
    SampleCloud cloud;              ///< FLAG cloud
    std::vector<int32_t> image_of;  ///< K index -> FLAG index
};

/// pi applied to every point of a K cloud, duplicates at 1e-9 removed, first
/// occurrences kept in order.
ProjectedCloud project_cloud(const SampleCloud& k_cloud);

/// Nearest-sample queries in the natural metric of each space: Frobenius
/// distance on K, the minimum over M-representatives on FLAG and the chordal
/// distance on PROJ.
class CloudMetric {
public:
    explicit CloudMetric(const SampleCloud& cloud);
    /// Restricts the candidates to `subset` (indices into cloud).
    CloudMetric(const SampleCloud& cloud, const std::vector<int32_t>& subset);

    struct Match {
        int32_t index = -1;  ///< -1 when there are no candidates
        double dist = 0.0;
    };

    /// `raw` is a column-major n x n rotation (K, FLAG) or an n-vector (PROJ).
    [[nodiscard]] Match nearest(const double* raw, int32_t exclude = -1) const;
    [[nodiscard]] Match nearest(const Matrix& raw, int32_t exclude = -1) const { return nearest(raw.data(), exclude); }

private:
    void embed(const double* raw, double* out) const;
    void insert(const double* raw, int32_t owner, std::vector<double>& coords, std::vector<int32_t>& owners) const;

    Space space_;
    int n_;
    int edim_;
    PointIndex index_;
};

/// Largest nearest-neighbour distance within the cloud.
double dispersion(const SampleCloud& cloud);

/// 2 x dispersion.
double default_epsilon(const SampleCloud& cloud);

/// 8 for n = 2, 6 otherwise.
int default_word_depth(int n);

/// Worker count from FLAGDYN_THREADS, else the hardware concurrency.
int default_thread_count();

struct ReachGraph {
    SampleCloud cloud;
    double epsilon = 0.0;
    int word_depth = 0;
    size_t word_count = 0;
    /// CSR adjacency; targets of i are sorted and unique.
    std::vector<int64_t> offsets;
    std::vector<int32_t> targets;

    [[nodiscard]] size_t size() const noexcept { return cloud.size(); }
    [[nodiscard]] size_t edge_count() const noexcept { return targets.size(); }
    [[nodiscard]] std::pair<const int32_t*, const int32_t*> out(size_t i) const {
        return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
    }
};

/// Edge i -> j whenever some word of length <= word_depth sends point i
/// within epsilon of point j, j being the nearest sample to the image.
/// Warns when the mean out-degree is below 1. threads <= 0 uses
/// default_thread_count().
ReachGraph build_reach_graph(const GeneratorSet& gens, const SampleCloud& cloud, double epsilon, int word_depth,
                             int threads = 0);

struct ControlSetRecord {
    int id = 0;
    std::vector<int32_t> member_indices;  ///< sorted
    std::vector<int32_t> core_indices;    ///< sorted, subset of members
    bool invariant = false;
    std::vector<SignedPermutation> u_labels;  ///< K records
    std::vector<WeylElement> w_labels;        ///< FLAG and PROJ records
    int order_rank = 0;
};

/// max(2, ceil(0.005 N)).
int default_min_core_size(size_t cloud_size);

/// Cores are the strongly connected components with an internal edge and at
/// least min_core_size points (<= 0 selects default_min_core_size). Each core
/// is extended by the non-core points that reach it and lie within epsilon of
/// it. Records are sorted by smallest member index; invariance and order
/// rank (length of the longest chain of records below) are filled in.
std::vector<ControlSetRecord> find_control_sets(const ReachGraph& graph, int min_core_size = 0);

/// True iff no edge leaves the members from a core point.
bool classify_invariant(const ControlSetRecord& cs, const ReachGraph& graph);

/// Pairs (a, b) of record ids with a <= b: some core point of a reaches some
/// core point of b. Throws CycleError if two records reach each other.
std::vector<std::pair<int, int>> order_control_sets(const std::vector<ControlSetRecord>& records,
                                                    const ReachGraph& graph);

/// Typed fixed points of one regular element in the graph's space. For K the
/// u label is set; otherwise the w label.
struct TypedPoint {
    std::optional<SignedPermutation> u;
    std::optional<WeylElement> w;
    Matrix raw;  ///< rotation or direction, as for CloudMetric::nearest
};
std::vector<TypedPoint> typed_fixed_points(Space space, const GroupElement& h, double tol = kDefaultRegularityTol);

/// Index of the record whose core contains the sample nearest to `raw` among
/// all core samples, provided it is within epsilon; -1 otherwise.
class CoreLocator {
public:
    CoreLocator(const ReachGraph& graph, const std::vector<ControlSetRecord>& records);
    [[nodiscard]] int locate(const double* raw) const;
    [[nodiscard]] int locate(const Matrix& raw) const { return locate(raw.data()); }

private:
    CloudMetric metric_;
    std::vector<int> record_of_;
    double epsilon_;
};

struct LabelOptions {
    double tol = kDefaultRegularityTol;
    int search_depth = 0;  ///< <= 0 uses the graph's word depth
    int words = 16;        ///< regular words that vote
};

/// Labels each record with fixed-point types. Up to opts.words regular-positive
/// words, spread evenly over the enumerate_words list, each place their typed
/// fixed points in the core of the nearest core sample (within epsilon); a type
/// goes to the record that received it most often, ties to the lower id.
/// Fixed points of short words sit at the rim of their transitivity set, so a
/// single word can misplace a type by one epsilon-cell. Throws
/// NoRegularElementError if no word up to the search depth is regular.
void label_control_sets(std::vector<ControlSetRecord>& records, const ReachGraph& graph, const GeneratorSet& gens,
                        const LabelOptions& opts = {});

/// The invariant record carrying the identity label, or -1.
int anchor_record(const std::vector<ControlSetRecord>& records);

/// record id per sample for member samples, -1 elsewhere.
std::vector<int> membership(const std::vector<ControlSetRecord>& records, size_t cloud_size);

/// A graph together with its labeled control sets.
struct ControlSetRun {
    ReachGraph graph;
    std::vector<ControlSetRecord> records;
};

/// build_reach_graph + find_control_sets + label_control_sets. Labeling is
/// skipped when there are no records.
ControlSetRun run_control_sets(const GeneratorSet& gens, const SampleCloud& cloud, double epsilon, int word_depth,
                               int threads = 0);

}  // namespace flagdyn
