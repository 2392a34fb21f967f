#include "flagdyn/semigroup_engine.hpp"

#include "flagdyn/errors.hpp"
#include "flagdyn/flag_action.hpp"
#include "flagdyn/k_action.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace flagdyn {

std::string to_string(Space s) {
    switch (s) {
        case Space::K:
            return "K";
        case Space::FLAG:
            return "FLAG";
        case Space::PROJ:
            return "PROJ";
    }
    return "?";
}

Space parse_space(const std::string& s) {
    std::string up = s;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "K") {
        return Space::K;
    }
    if (up == "FLAG") {
        return Space::FLAG;
    }
    if (up == "PROJ") {
        return Space::PROJ;
    }
    throw std::invalid_argument("unknown space '" + s + "'");
}

// ---------------------------------------------------------------- presets

namespace {

Matrix rotation_in_plane(int n, int i, int j, double angle) {
    Matrix r = Matrix::Identity(n, n);
    r(i, i) = std::cos(angle);
    r(j, j) = std::cos(angle);
    r(i, j) = -std::sin(angle);
    r(j, i) = std::sin(angle);
    return r;
}

}  // namespace

GeneratorSet make_preset(const std::string& name, int n) {
    GeneratorSet out;
    if (name == "slplus2") {
        if (n != 2) {
            throw std::invalid_argument("preset slplus2 requires n = 2");
        }
        Matrix a(2, 2);
        a << 3.0, 0.02, 0.02, 1.0 / 3.0;
        Matrix b(2, 2);
        b << 1.0 / 3.0, 0.02, 0.02, 3.0;
        out.gens = {GroupElement::from_product(a), GroupElement::from_product(b)};
        out.description = "positive 2x2 matrices near diag(3,1/3) and diag(1/3,3)";
        return out;
    }
    if (name == "slplus3") {
        if (n != 3) {
            throw std::invalid_argument("preset slplus3 requires n = 3");
        }
        constexpr double lam = 1.5;
        constexpr double off = 0.1;
        const double diags[3][3] = {{lam, 1.0, 1.0 / lam}, {1.0 / lam, lam, 1.0}, {1.0, 1.0 / lam, lam}};
        for (const auto& d : diags) {
            Matrix g = Matrix::Constant(3, 3, off);
            for (int i = 0; i < 3; ++i) {
                g(i, i) = d[i];
            }
            out.gens.push_back(GroupElement::from_product(g));
        }
        out.description = "positive 3x3 matrices: cyclic shifts of diag(1.5,1,1/1.5) plus 0.1 off the diagonal";
        return out;
    }
    if (name == "full-group") {
        if (n == 2) {
            out.gens = {GroupElement::from_product(rotation_in_plane(2, 0, 1, 1.0)),
                        GroupElement::from_product(Matrix(Eigen::Vector2d(2.0, 0.5).asDiagonal()))};
        } else if (n == 3) {
            out.gens = {GroupElement::from_product(rotation_in_plane(3, 1, 2, 1.0)),
                        GroupElement::from_product(rotation_in_plane(3, 0, 1, std::sqrt(2.0))),
                        GroupElement::from_product(Matrix(Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal()))};
        } else {
            throw std::invalid_argument("preset full-group requires n = 2 or 3");
        }
        out.description = "rotations by irrational angles and a regular diagonal element";
        return out;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<Word> enumerate_words(const GeneratorSet& gens, int depth) {
    std::vector<Word> all;
    if (gens.gens.empty() || depth < 1) {
        return all;
    }
    std::vector<Word> layer;
    for (size_t i = 0; i < gens.gens.size(); ++i) {
        layer.push_back(Word{gens.gens[i], {static_cast<int>(i)}});
    }
    all = layer;
    for (int d = 2; d <= depth; ++d) {
        std::vector<Word> next;
        next.reserve(layer.size() * gens.gens.size());
        for (size_t i = 0; i < gens.gens.size(); ++i) {
            for (const Word& w : layer) {
                std::vector<int> letters;
                letters.reserve(w.letters.size() + 1);
                letters.push_back(static_cast<int>(i));
                letters.insert(letters.end(), w.letters.begin(), w.letters.end());
                next.push_back(Word{gens.gens[i] * w.g, std::move(letters)});
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return all;
}

// ---------------------------------------------------------------- sampling

namespace {

void check_dim(int n) {
    if (n < 2 || n > 4) {
        throw UnsupportedSpaceError("sampling supports n in {2, 3, 4}");
    }
}

SampleCloud sample_K(int n, int count, uint64_t seed) {
    SampleCloud c{Space::K, n, seed, Matrix(n, static_cast<Eigen::Index>(n) * count)};
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double t = 2.0 * M_PI * i / count;
            c.data.middleCols(2 * i, 2) = rotation_in_plane(2, 0, 1, t);
        }
        return c;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        if (n == 3) {
            Eigen::Quaterniond q;
            do {
                q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
            } while (q.norm() < 1e-12);
            q.normalize();
            c.data.middleCols(3 * i, 3) = q.toRotationMatrix();
        } else {
            Matrix g(n, n);
            for (Eigen::Index k = 0; k < g.size(); ++k) {
                g.data()[k] = normal(rng);
            }
            Eigen::HouseholderQR<Matrix> qr(g);
            Matrix q = qr.householderQ();
            const Matrix r = qr.matrixQR();
            for (int j = 0; j < n; ++j) {
                if (r(j, j) < 0.0) {
                    q.col(j) = -q.col(j);
                }
            }
            if (q.determinant() < 0.0) {
                q.col(0) = -q.col(0);
            }
            c.data.middleCols(n * i, n) = q;
        }
    }
    return c;
}

// Keeps the first of every group of columns-blocks agreeing to 1e-9.
std::vector<int32_t> dedupe_blocks(const Matrix& data, int block, std::vector<int32_t>& first_index) {
    std::map<std::vector<long long>, int32_t> seen;
    std::vector<int32_t> kept;
    const auto count = static_cast<size_t>(data.cols() / block);
    first_index.assign(count, -1);
    const Eigen::Index len = data.rows() * block;
    for (size_t i = 0; i < count; ++i) {
        const double* p = data.data() + static_cast<Eigen::Index>(i) * len;
        std::vector<long long> key(static_cast<size_t>(len));
        for (Eigen::Index k = 0; k < len; ++k) {
            key[static_cast<size_t>(k)] = std::llround(p[k] * 1e9);
        }
        auto [it, inserted] = seen.emplace(std::move(key), static_cast<int32_t>(kept.size()));
        if (inserted) {
            kept.push_back(static_cast<int32_t>(i));
        }
        first_index[i] = it->second;
    }
    return kept;
}

Matrix gather_blocks(const Matrix& data, int block, const std::vector<int32_t>& idx) {
    Matrix out(data.rows(), static_cast<Eigen::Index>(idx.size()) * block);
    for (size_t i = 0; i < idx.size(); ++i) {
        out.middleCols(static_cast<Eigen::Index>(i) * block, block) = data.middleCols(idx[i] * block, block);
    }
    return out;
}

}  // namespace

ProjectedCloud project_cloud(const SampleCloud& k_cloud) {
    if (k_cloud.space != Space::K) {
        throw std::invalid_argument("project_cloud expects a K cloud");
    }
    const int n = k_cloud.n;
    Matrix frames = k_cloud.data;
    for (size_t i = 0; i < k_cloud.size(); ++i) {
        canonicalize_frame(frames.middleCols(static_cast<Eigen::Index>(i) * n, n));
    }
    ProjectedCloud out;
    const std::vector<int32_t> kept = dedupe_blocks(frames, n, out.image_of);
    out.cloud = SampleCloud{Space::FLAG, n, k_cloud.seed, gather_blocks(frames, n, kept)};
    return out;
}

SampleCloud sample_space(Space space, int n, int count, uint64_t seed) {
    check_dim(n);
    if (count < 1) {
        throw std::invalid_argument("count must be positive");
    }
    switch (space) {
        case Space::K:
            return sample_K(n, count, seed);
        case Space::FLAG:
            return project_cloud(sample_K(n, count, seed)).cloud;
        case Space::PROJ: {
            if (n == 2) {
                SampleCloud c{Space::PROJ, 2, seed, Matrix(2, count)};
                for (int i = 0; i < count; ++i) {
                    const double t = M_PI * i / count;
                    Vector v(2);
                    v << std::cos(t), std::sin(t);
                    canonicalize_sign(v);
                    c.data.col(i) = v;
                }
                return c;
            }
            const SampleCloud k = sample_K(n, count, seed);
            Matrix dirs(n, count);
            for (int i = 0; i < count; ++i) {
                Vector v = k.data.col(static_cast<Eigen::Index>(i) * n);
                canonicalize_sign(v);
                dirs.col(i) = v;
            }
            std::vector<int32_t> first;
            const std::vector<int32_t> kept = dedupe_blocks(dirs, 1, first);
            return SampleCloud{Space::PROJ, n, seed, gather_blocks(dirs, 1, kept)};
        }
    }
    throw std::invalid_argument("unknown space");
}

// ---------------------------------------------------------------- metric

namespace {

int embedding_dim(Space space, int n) {
    if (space == Space::PROJ) {
        return n;
    }
    if (n == 2) {
        return 2;
    }
    if (n == 3) {
        return 4;
    }
    return n * n;
}

}  // namespace

void CloudMetric::embed(const double* raw, double* out) const {
    if (space_ == Space::PROJ) {
        std::copy(raw, raw + n_, out);
        return;
    }
    if (n_ == 2) {
        // ||R(a) - R(b)||_F = sqrt(2) |e^{ia} - e^{ib}|
        out[0] = std::sqrt(2.0) * raw[0];
        out[1] = std::sqrt(2.0) * raw[1];
        return;
    }
    if (n_ == 3) {
        const Eigen::Quaterniond q{Eigen::Map<const Eigen::Matrix3d>(raw)};
        out[0] = q.w();
        out[1] = q.x();
        out[2] = q.y();
        out[3] = q.z();
        return;
    }
    std::copy(raw, raw + n_ * n_, out);
}

void CloudMetric::insert(const double* raw, int32_t owner, std::vector<double>& coords,
                         std::vector<int32_t>& owners) const {
    std::vector<double> e(static_cast<size_t>(edim_));
    auto push = [&](const double* r, bool both_signs) {
        embed(r, e.data());
        coords.insert(coords.end(), e.begin(), e.end());
        owners.push_back(owner);
        if (both_signs) {
            for (double& x : e) {
                x = -x;
            }
            coords.insert(coords.end(), e.begin(), e.end());
            owners.push_back(owner);
        }
    };
    if (space_ == Space::PROJ) {
        push(raw, true);
        return;
    }
    const bool quaternion = n_ == 3;
    if (space_ == Space::K) {
        push(raw, quaternion);
        return;
    }
    Matrix k = Eigen::Map<const Matrix>(raw, n_, n_);
    for (const SignVector& m : enumerate_M(n_)) {
        const Matrix km = k * m.matrix();
        push(km.data(), quaternion);
    }
}

CloudMetric::CloudMetric(const SampleCloud& cloud) : CloudMetric(cloud, [&] {
    std::vector<int32_t> all(cloud.size());
    for (size_t i = 0; i < all.size(); ++i) {
        all[i] = static_cast<int32_t>(i);
    }
    return all;
}()) {}

CloudMetric::CloudMetric(const SampleCloud& cloud, const std::vector<int32_t>& subset)
    : space_(cloud.space), n_(cloud.n), edim_(embedding_dim(cloud.space, cloud.n)) {
    std::vector<double> coords;
    std::vector<int32_t> owners;
    const Eigen::Index len = static_cast<Eigen::Index>(cloud.n) * cloud.block();
    for (int32_t i : subset) {
        insert(cloud.data.data() + i * len, i, coords, owners);
    }
    index_ = PointIndex(edim_, std::move(coords), std::move(owners));
}

CloudMetric::Match CloudMetric::nearest(const double* raw, int32_t exclude) const {
    double e[16];
    embed(raw, e);
    const PointIndex::Hit hit = index_.nearest(e, exclude);
    if (hit.slot < 0) {
        return {};
    }
    double d = std::sqrt(hit.dist2);
    if (space_ != Space::PROJ && n_ == 3) {
        // unit quaternions at distance d have |<p,q>| = 1 - d^2/2, and
        // ||R_p - R_q||_F^2 = 8 (1 - <p,q>^2)
        const double c = std::clamp(1.0 - 0.5 * hit.dist2, -1.0, 1.0);
        d = std::sqrt(std::max(0.0, 8.0 * (1.0 - c * c)));
    }
    return {index_.owner(hit.slot), d};
}

double dispersion(const SampleCloud& cloud) {
    if (cloud.size() < 2) {
        return 0.0;
    }
    const CloudMetric metric(cloud);
    const Eigen::Index len = static_cast<Eigen::Index>(cloud.n) * cloud.block();
    double worst = 0.0;
    for (size_t i = 0; i < cloud.size(); ++i) {
        const auto m = metric.nearest(cloud.data.data() + static_cast<Eigen::Index>(i) * len, static_cast<int32_t>(i));
        worst = std::max(worst, m.dist);
    }
    return worst;
}

double default_epsilon(const SampleCloud& cloud) { return 2.0 * dispersion(cloud); }

int default_word_depth(int n) { return n == 2 ? 8 : 6; }

int default_thread_count() {
    if (const char* env = std::getenv("FLAGDYN_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) {
            return v;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- graph

ReachGraph build_reach_graph(const GeneratorSet& gens, const SampleCloud& cloud, double epsilon, int word_depth,
                             int threads) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    if (word_depth < 1) {
        throw std::invalid_argument("word depth must be at least 1");
    }
    for (const GroupElement& g : gens.gens) {
        if (g.dim() != cloud.n) {
            throw InvalidGroupElementError("generator dimension does not match the cloud");
        }
    }
    ReachGraph graph;
    graph.cloud = cloud;
    graph.epsilon = epsilon;
    graph.word_depth = word_depth;
    const size_t npts = cloud.size();
    const std::vector<Word> words = enumerate_words(gens, word_depth);
    graph.word_count = words.size();

    const CloudMetric metric(cloud);
    std::vector<std::vector<int32_t>> adj(npts);
    const int block = cloud.block();
    const bool proj = cloud.space == Space::PROJ;

    auto work = [&](size_t begin, size_t end) {
        if (begin >= end) {
            return;
        }
        const auto first = static_cast<Eigen::Index>(begin) * block;
        const auto cols = static_cast<Eigen::Index>(end - begin) * block;
        Matrix img(cloud.n, cols);
        for (size_t w = 0; w < words.size(); ++w) {
            img.noalias() = words[w].g.matrix() * cloud.data.middleCols(first, cols);
            for (size_t i = begin; i < end; ++i) {
                const auto off = static_cast<Eigen::Index>(i - begin) * block;
                if (proj) {
                    img.col(off).normalize();
                } else {
                    orthonormalize_columns(img.middleCols(off, block));
                }
                const auto m = metric.nearest(img.data() + off * cloud.n);
                if (m.index >= 0 && m.dist <= epsilon) {
                    adj[i].push_back(m.index);
                }
            }
            if (w % 64 == 63) {
                for (size_t i = begin; i < end; ++i) {
                    std::sort(adj[i].begin(), adj[i].end());
                    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
                }
            }
        }
        for (size_t i = begin; i < end; ++i) {
            std::sort(adj[i].begin(), adj[i].end());
            adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
        }
    };

    const int nthreads =
        static_cast<int>(std::min<size_t>(static_cast<size_t>(threads > 0 ? threads : default_thread_count()),
                                          std::max<size_t>(1, npts)));
    if (nthreads <= 1) {
        work(0, npts);
    } else {
        std::vector<std::thread> pool;
        const size_t chunk = (npts + static_cast<size_t>(nthreads) - 1) / static_cast<size_t>(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            const size_t b = std::min(npts, static_cast<size_t>(t) * chunk);
            const size_t e = std::min(npts, b + chunk);
            pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    graph.offsets.assign(npts + 1, 0);
    for (size_t i = 0; i < npts; ++i) {
        graph.offsets[i + 1] = graph.offsets[i] + static_cast<int64_t>(adj[i].size());
    }
    graph.targets.reserve(static_cast<size_t>(graph.offsets[npts]));
    for (auto& a : adj) {
        graph.targets.insert(graph.targets.end(), a.begin(), a.end());
        std::vector<int32_t>().swap(a);
    }
    if (npts > 0 && !words.empty() && static_cast<double>(graph.targets.size()) < static_cast<double>(npts)) {
        std::ostringstream os;
        os << "sparse reachability graph: mean out-degree "
           << static_cast<double>(graph.targets.size()) / static_cast<double>(npts) << " < 1";
        warn(os.str());
    }
    return graph;
}

// ---------------------------------------------------------------- control sets

namespace {

// Iterative Tarjan. Component ids are assigned in order of completion.
std::vector<int32_t> strong_components(const ReachGraph& g, int32_t& count) {
    const auto n = static_cast<int32_t>(g.size());
    std::vector<int32_t> index(static_cast<size_t>(n), -1);
    std::vector<int32_t> low(static_cast<size_t>(n), 0);
    std::vector<int32_t> comp(static_cast<size_t>(n), -1);
    std::vector<char> on_stack(static_cast<size_t>(n), 0);
    std::vector<int32_t> stack;
    std::vector<std::pair<int32_t, int64_t>> call;  // (vertex, next edge offset)
    int32_t next_index = 0;
    count = 0;
    for (int32_t root = 0; root < n; ++root) {
        if (index[static_cast<size_t>(root)] >= 0) {
            continue;
        }
        call.emplace_back(root, g.offsets[static_cast<size_t>(root)]);
        index[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<size_t>(root)] = 1;
        while (!call.empty()) {
            auto& [v, e] = call.back();
            const auto vs = static_cast<size_t>(v);
            if (e < g.offsets[vs + 1]) {
                const int32_t w = g.targets[static_cast<size_t>(e)];
                ++e;
                const auto ws = static_cast<size_t>(w);
                if (index[ws] < 0) {
                    index[ws] = low[ws] = next_index++;
                    stack.push_back(w);
                    on_stack[ws] = 1;
                    call.emplace_back(w, g.offsets[ws]);
                } else if (on_stack[ws]) {
                    low[vs] = std::min(low[vs], index[ws]);
                }
                continue;
            }
            if (low[vs] == index[vs]) {
                int32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<size_t>(w)] = 0;
                    comp[static_cast<size_t>(w)] = count;
                } while (w != v);
                ++count;
            }
            const int32_t done = v;
            call.pop_back();
            if (!call.empty()) {
                const auto ps = static_cast<size_t>(call.back().first);
                low[ps] = std::min(low[ps], low[static_cast<size_t>(done)]);
            }
        }
    }
    return comp;
}

std::vector<char> reaching(const ReachGraph& g, const std::vector<int64_t>& roff, const std::vector<int32_t>& rtar,
                           const std::vector<int32_t>& seeds) {
    std::vector<char> seen(g.size(), 0);
    std::vector<int32_t> queue(seeds.begin(), seeds.end());
    for (int32_t s : seeds) {
        seen[static_cast<size_t>(s)] = 1;
    }
    for (size_t h = 0; h < queue.size(); ++h) {
        const auto v = static_cast<size_t>(queue[h]);
        for (int64_t e = roff[v]; e < roff[v + 1]; ++e) {
            const int32_t w = rtar[static_cast<size_t>(e)];
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = 1;
                queue.push_back(w);
            }
        }
    }
    return seen;
}

std::vector<char> reached_from(const ReachGraph& g, const std::vector<int32_t>& seeds) {
    std::vector<char> seen(g.size(), 0);
    std::vector<int32_t> queue(seeds.begin(), seeds.end());
    for (int32_t s : seeds) {
        seen[static_cast<size_t>(s)] = 1;
    }
    for (size_t h = 0; h < queue.size(); ++h) {
        auto [b, e] = g.out(static_cast<size_t>(queue[h]));
        for (const int32_t* p = b; p != e; ++p) {
            if (!seen[static_cast<size_t>(*p)]) {
                seen[static_cast<size_t>(*p)] = 1;
                queue.push_back(*p);
            }
        }
    }
    return seen;
}

}  // namespace

int default_min_core_size(size_t cloud_size) {
    return std::max(2, static_cast<int>(std::ceil(0.005 * static_cast<double>(cloud_size))));
}

std::vector<ControlSetRecord> find_control_sets(const ReachGraph& graph, int min_core_size) {
    const size_t npts = graph.size();
    if (min_core_size <= 0) {
        min_core_size = default_min_core_size(npts);
    }
    int32_t ncomp = 0;
    const std::vector<int32_t> comp = strong_components(graph, ncomp);

    std::vector<int32_t> comp_size(static_cast<size_t>(ncomp), 0);
    std::vector<char> internal(static_cast<size_t>(ncomp), 0);
    for (size_t i = 0; i < npts; ++i) {
        const auto c = static_cast<size_t>(comp[i]);
        ++comp_size[c];
        auto [b, e] = graph.out(i);
        for (const int32_t* p = b; p != e; ++p) {
            if (comp[static_cast<size_t>(*p)] == comp[i]) {
                internal[c] = 1;
            }
        }
    }
    std::vector<std::vector<int32_t>> cores;
    std::vector<int32_t> core_of_comp(static_cast<size_t>(ncomp), -1);
    for (size_t i = 0; i < npts; ++i) {
        const auto c = static_cast<size_t>(comp[i]);
        if (!internal[c] || comp_size[c] < min_core_size) {
            continue;
        }
        if (core_of_comp[c] < 0) {
            core_of_comp[c] = static_cast<int32_t>(cores.size());
            cores.emplace_back();
        }
        cores[static_cast<size_t>(core_of_comp[c])].push_back(static_cast<int32_t>(i));
    }
    if (cores.empty()) {
        return {};
    }

    std::vector<int32_t> core_of_point(npts, -1);
    std::vector<int32_t> all_core;
    for (size_t c = 0; c < cores.size(); ++c) {
        for (int32_t p : cores[c]) {
            core_of_point[static_cast<size_t>(p)] = static_cast<int32_t>(c);
            all_core.push_back(p);
        }
    }
    std::sort(all_core.begin(), all_core.end());

    // reverse adjacency
    std::vector<int64_t> roff(npts + 1, 0);
    for (int32_t t : graph.targets) {
        ++roff[static_cast<size_t>(t) + 1];
    }
    for (size_t i = 0; i < npts; ++i) {
        roff[i + 1] += roff[i];
    }
    std::vector<int32_t> rtar(graph.targets.size());
    {
        std::vector<int64_t> fill(roff.begin(), roff.end() - 1);
        for (size_t i = 0; i < npts; ++i) {
            auto [b, e] = graph.out(i);
            for (const int32_t* p = b; p != e; ++p) {
                rtar[static_cast<size_t>(fill[static_cast<size_t>(*p)]++)] = static_cast<int32_t>(i);
            }
        }
    }

    std::vector<std::vector<char>> reaches(cores.size());
    for (size_t c = 0; c < cores.size(); ++c) {
        reaches[c] = reaching(graph, roff, rtar, cores[c]);
    }

    std::vector<std::vector<int32_t>> members = cores;
    const CloudMetric core_metric(graph.cloud, all_core);
    const Eigen::Index len = static_cast<Eigen::Index>(graph.cloud.n) * graph.cloud.block();
    for (size_t i = 0; i < npts; ++i) {
        if (core_of_point[i] >= 0) {
            continue;
        }
        const auto m = core_metric.nearest(graph.cloud.data.data() + static_cast<Eigen::Index>(i) * len);
        if (m.index < 0 || m.dist > graph.epsilon) {
            continue;
        }
        const auto c = static_cast<size_t>(core_of_point[static_cast<size_t>(m.index)]);
        if (reaches[c][i]) {
            members[c].push_back(static_cast<int32_t>(i));
        }
    }

    std::vector<ControlSetRecord> records;
    for (size_t c = 0; c < cores.size(); ++c) {
        ControlSetRecord r;
        r.core_indices = cores[c];
        r.member_indices = members[c];
        std::sort(r.member_indices.begin(), r.member_indices.end());
        records.push_back(std::move(r));
    }
    std::sort(records.begin(), records.end(), [](const ControlSetRecord& a, const ControlSetRecord& b) {
        return a.member_indices.front() < b.member_indices.front();
    });
    for (size_t i = 0; i < records.size(); ++i) {
        records[i].id = static_cast<int>(i);
        records[i].invariant = classify_invariant(records[i], graph);
    }

    const auto order = order_control_sets(records, graph);
    // longest chain below each record; the order is acyclic
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [lo, hi] : order) {
            const int want = records[static_cast<size_t>(lo)].order_rank + 1;
            if (records[static_cast<size_t>(hi)].order_rank < want) {
                records[static_cast<size_t>(hi)].order_rank = want;
                changed = true;
            }
        }
    }
    return records;
}

bool classify_invariant(const ControlSetRecord& cs, const ReachGraph& graph) {
    for (int32_t i : cs.core_indices) {
        auto [b, e] = graph.out(static_cast<size_t>(i));
        for (const int32_t* p = b; p != e; ++p) {
            if (!std::binary_search(cs.member_indices.begin(), cs.member_indices.end(), *p)) {
                return false;
            }
        }
    }
    return true;
}

std::vector<std::pair<int, int>> order_control_sets(const std::vector<ControlSetRecord>& records,
                                                    const ReachGraph& graph) {
    std::vector<int> core_record(graph.size(), -1);
    for (const auto& r : records) {
        for (int32_t i : r.core_indices) {
            core_record[static_cast<size_t>(i)] = r.id;
        }
    }
    const size_t nr = records.size();
    std::vector<std::vector<char>> below(nr, std::vector<char>(nr, 0));
    for (const auto& r : records) {
        const std::vector<char> seen = reached_from(graph, r.core_indices);
        for (size_t i = 0; i < seen.size(); ++i) {
            if (seen[i] && core_record[i] >= 0 && core_record[i] != r.id) {
                below[static_cast<size_t>(r.id)][static_cast<size_t>(core_record[i])] = 1;
            }
        }
    }
    std::vector<std::pair<int, int>> out;
    for (size_t a = 0; a < nr; ++a) {
        for (size_t b = 0; b < nr; ++b) {
            if (!below[a][b]) {
                continue;
            }
            if (below[b][a]) {
                std::ostringstream os;
                os << "control sets " << a << " and " << b << " reach each other; epsilon is too coarse";
                throw CycleError(os.str());
            }
            out.emplace_back(static_cast<int>(a), static_cast<int>(b));
        }
    }
    return out;
}

// ---------------------------------------------------------------- labels

std::vector<TypedPoint> typed_fixed_points(Space space, const GroupElement& h, double tol) {
    std::vector<TypedPoint> out;
    switch (space) {
        case Space::K:
            for (auto& f : fixed_points_on_K(h, tol)) {
                out.push_back(TypedPoint{f.u_label, std::nullopt, std::move(f.point.rot)});
            }
            break;
        case Space::FLAG:
            for (auto& [w, f] : fixed_points_on_flag(h, tol)) {
                out.push_back(TypedPoint{std::nullopt, w, std::move(f.frame)});
            }
            break;
        case Space::PROJ:
            for (auto& [w, p] : fixed_points_on_projective(h, tol)) {
                out.push_back(TypedPoint{std::nullopt, w, Matrix(p.dir)});
            }
            break;
    }
    return out;
}

namespace {

std::vector<int32_t> core_union(const std::vector<ControlSetRecord>& records) {
    std::vector<int32_t> all;
    for (const auto& r : records) {
        all.insert(all.end(), r.core_indices.begin(), r.core_indices.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

CoreLocator::CoreLocator(const ReachGraph& graph, const std::vector<ControlSetRecord>& records)
    : metric_(graph.cloud, core_union(records)), record_of_(graph.size(), -1), epsilon_(graph.epsilon) {
    for (const auto& r : records) {
        for (int32_t i : r.core_indices) {
            record_of_[static_cast<size_t>(i)] = r.id;
        }
    }
}

int CoreLocator::locate(const double* raw) const {
    const auto m = metric_.nearest(raw);
    if (m.index < 0 || m.dist > epsilon_) {
        return -1;
    }
    return record_of_[static_cast<size_t>(m.index)];
}

void label_control_sets(std::vector<ControlSetRecord>& records, const ReachGraph& graph, const GeneratorSet& gens,
                        const LabelOptions& opts) {
    if (records.empty()) {
        return;
    }
    const int depth = opts.search_depth > 0 ? opts.search_depth : std::max(1, graph.word_depth);
    std::vector<GroupElement> regular;
    for (const Word& word : enumerate_words(gens, depth)) {
        if (is_regular_positive(word.g, opts.tol)) {
            regular.push_back(word.g);
        }
    }
    if (regular.empty()) {
        throw NoRegularElementError("no regular-positive word up to the search depth");
    }
    const size_t nvote = std::min(regular.size(), static_cast<size_t>(std::max(1, opts.words)));
    const CoreLocator locator(graph, records);
    std::map<SignedPermutation, std::vector<int>> u_votes;
    std::map<WeylElement, std::vector<int>> w_votes;
    for (size_t k = 0; k < nvote; ++k) {
        const GroupElement& h = regular[k * regular.size() / nvote];
        for (const TypedPoint& tp : typed_fixed_points(graph.cloud.space, h, opts.tol)) {
            const int r = locator.locate(tp.raw);
            if (r < 0) {
                continue;
            }
            auto& tally = tp.u ? u_votes[*tp.u] : w_votes[*tp.w];
            tally.resize(records.size(), 0);
            ++tally[static_cast<size_t>(r)];
        }
    }
    auto winner = [](const std::vector<int>& tally) {
        return static_cast<size_t>(std::max_element(tally.begin(), tally.end()) - tally.begin());
    };
    for (auto& r : records) {
        r.u_labels.clear();
        r.w_labels.clear();
    }
    for (const auto& [u, tally] : u_votes) {
        records[winner(tally)].u_labels.push_back(u);
    }
    for (const auto& [w, tally] : w_votes) {
        records[winner(tally)].w_labels.push_back(w);
    }
    for (const auto& r : records) {
        if (r.u_labels.empty() && r.w_labels.empty()) {
            std::ostringstream os;
            os << "control set " << r.id << " received no fixed-point label";
            warn(os.str());
        }
    }
}

int anchor_record(const std::vector<ControlSetRecord>& records) {
    for (const auto& r : records) {
        if (!r.invariant) {
            continue;
        }
        for (const auto& u : r.u_labels) {
            if (u.is_identity()) {
                return r.id;
            }
        }
        for (const auto& w : r.w_labels) {
            if (w.is_identity()) {
                return r.id;
            }
        }
    }
    return -1;
}

std::vector<int> membership(const std::vector<ControlSetRecord>& records, size_t cloud_size) {
    std::vector<int> out(cloud_size, -1);
    for (const auto& r : records) {
        for (int32_t i : r.member_indices) {
            out[static_cast<size_t>(i)] = r.id;
        }
    }
    return out;
}

ControlSetRun run_control_sets(const GeneratorSet& gens, const SampleCloud& cloud, double epsilon, int word_depth,
                               int threads) {
    ControlSetRun run{build_reach_graph(gens, cloud, epsilon, word_depth, threads), {}};
    run.records = find_control_sets(run.graph);
    label_control_sets(run.records, run.graph, gens);
    return run;
}

}  // namespace flagdyn
