#include "flagdyn/errors.hpp"
#include "flagdyn/flag_action.hpp"
#include "flagdyn/k_action.hpp"
#include "flagdyn/semigroup_engine.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

using namespace flagdyn;

namespace {

Matrix m2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

double deg(double rad) { return rad * 180.0 / M_PI; }

// angle of a projective line in [0, 180)
double line_angle(const SampleCloud& c, size_t i) {
    const Matrix d = c.point(i);
    const double t = std::fmod(deg(std::atan2(d(1, 0), d(0, 0))) + 360.0, 180.0);
    return t > 180.0 - 1e-9 ? 0.0 : t;
}

// angle of the first column in [0, 360)
double angle_of(const SampleCloud& c, size_t i) {
    const Matrix p = c.point(i);
    const double t = deg(std::atan2(p(1, 0), p(0, 0)));
    return t < 0 ? t + 360.0 : t;
}

ReachGraph graph_from_edges(size_t n, const std::vector<std::pair<int, int>>& edges) {
    ReachGraph g;
    g.cloud = sample_space(Space::PROJ, 2, static_cast<int>(n), 0);
    g.epsilon = 0.1;
    g.word_depth = 1;
    std::vector<std::vector<int32_t>> adj(n);
    for (auto [a, b] : edges) {
        adj[static_cast<size_t>(a)].push_back(b);
    }
    g.offsets.push_back(0);
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        g.targets.insert(g.targets.end(), a.begin(), a.end());
        g.offsets.push_back(static_cast<int64_t>(g.targets.size()));
    }
    return g;
}

std::set<std::pair<int, int>> edge_set(const ReachGraph& g) {
    std::set<std::pair<int, int>> out;
    for (size_t i = 0; i < g.size(); ++i) {
        const auto [b, e] = g.out(i);
        for (const int32_t* t = b; t != e; ++t) {
            out.emplace(static_cast<int>(i), *t);
        }
    }
    return out;
}

std::vector<std::vector<bool>> closure(size_t n, const std::set<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[static_cast<size_t>(a)].push_back(b);
    }
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (size_t s = 0; s < n; ++s) {
        std::vector<int> stack(adj[s].begin(), adj[s].end());
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (reach[s][static_cast<size_t>(v)]) {
                continue;
            }
            reach[s][static_cast<size_t>(v)] = true;
            for (int w : adj[static_cast<size_t>(v)]) {
                stack.push_back(w);
            }
        }
    }
    return reach;
}

const ControlSetRecord& with_label(const std::vector<ControlSetRecord>& records, const SignedPermutation& u) {
    for (const auto& r : records) {
        if (std::find(r.u_labels.begin(), r.u_labels.end(), u) != r.u_labels.end()) {
            return r;
        }
    }
    throw std::runtime_error("label not found");
}

}  // namespace

TEST_CASE("sampling examples") {
    const auto k = sample_space(Space::K, 2, 360, 0);
    REQUIRE(k.size() == 360);
    for (size_t i = 0; i < 360; ++i) {
        CHECK(angle_of(k, i) == doctest::Approx(static_cast<double>(i)).epsilon(1e-9));
        CHECK(is_special_orthogonal(k.point(i), 1e-12));
    }
    const auto p = sample_space(Space::PROJ, 2, 180, 0);
    REQUIRE(p.size() == 180);
    for (size_t i = 0; i < 180; ++i) {
        CHECK(line_angle(p, i) == doctest::Approx(static_cast<double>(i)).epsilon(1e-9));
    }
    const auto a = sample_space(Space::K, 3, 1000, 42);
    const auto b = sample_space(Space::K, 3, 1000, 42);
    CHECK(a.data == b.data);
    CHECK_FALSE(a.data == sample_space(Space::K, 3, 1000, 43).data);
    CHECK_THROWS_AS(sample_space(Space::K, 5, 100, 0), UnsupportedSpaceError);
}

TEST_CASE("samples are canonical and distinct") {
    for (int n = 2; n <= 4; ++n) {
        const auto k = sample_space(Space::K, n, 400, 3);
        const auto pc = project_cloud(k);
        CHECK(pc.image_of.size() == k.size());
        const auto& f = pc.cloud;
        for (size_t i = 0; i < f.size(); ++i) {
            Matrix c = f.point(i);
            canonicalize_frame(c);
            CHECK((c - f.point(i)).norm() == 0.0);
        }
        for (size_t i = 0; i < k.size(); ++i) {
            CHECK(flag_distance(FlagPoint{f.point(static_cast<size_t>(pc.image_of[i]))},
                                project_to_flag(PointOnK{k.point(i)})) < 1e-12);
        }
        const CloudMetric metric(f);
        for (size_t i = 0; i < f.size(); ++i) {
            const Matrix q = f.point(i);
            CHECK(metric.nearest(q, static_cast<int32_t>(i)).dist > 1e-9);
        }
    }
    // pi is two-to-one on the circle
    CHECK(project_cloud(sample_space(Space::K, 2, 1440, 0)).cloud.size() == 720);
}

TEST_CASE("nearest neighbours agree with brute force") {
    std::mt19937_64 rng(21);
    for (Space s : {Space::K, Space::FLAG, Space::PROJ}) {
        for (int n = 2; n <= 4; ++n) {
            const SampleCloud c = s == Space::FLAG ? project_cloud(sample_space(Space::K, n, 300, 5)).cloud
                                                   : sample_space(s, n, 300, 5);
            const SampleCloud queries = sample_space(Space::K, n, 50, 99);
            const CloudMetric metric(c);
            for (size_t q = 0; q < queries.size(); ++q) {
                Matrix raw = queries.point(q);
                if (s == Space::PROJ) {
                    raw = Matrix(raw.col(0));
                }
                double best = 1e9;
                for (size_t i = 0; i < c.size(); ++i) {
                    double d = 0.0;
                    if (s == Space::K) {
                        d = (Matrix(c.point(i)) - raw).norm();
                    } else if (s == Space::FLAG) {
                        d = flag_distance(FlagPoint{c.point(i)}, FlagPoint{raw});
                    } else {
                        d = proj_distance(ProjPoint{Vector(c.point(i))}, ProjPoint{Vector(raw.col(0))});
                    }
                    best = std::min(best, d);
                }
                CHECK(std::abs(metric.nearest(raw).dist - best) < 1e-7);
            }
        }
    }
}

TEST_CASE("dispersion of equispaced circles") {
    CHECK(dispersion(sample_space(Space::K, 2, 360, 0)) ==
          doctest::Approx(2 * std::sqrt(2.0) * std::sin(M_PI / 360)).epsilon(1e-9));
    CHECK(dispersion(sample_space(Space::PROJ, 2, 180, 0)) ==
          doctest::Approx(std::sqrt(2 - 2 * std::cos(M_PI / 180))).epsilon(1e-9));
    const auto c = sample_space(Space::K, 2, 360, 0);
    CHECK(default_epsilon(c) == doctest::Approx(2 * dispersion(c)));
    CHECK(default_word_depth(2) == 8);
    CHECK(default_word_depth(3) == 6);
}

TEST_CASE("word enumeration") {
    const GeneratorSet g{{GroupElement(m2(2, 1, 1, 1)), GroupElement(m2(1, 1, 1, 2))}, "test"};
    const auto words = enumerate_words(g, 4);
    CHECK(words.size() == 2 + 4 + 8 + 16);
    for (const auto& w : words) {
        Matrix p = Matrix::Identity(2, 2);
        for (int l : w.letters) {
            p = p * g.gens[static_cast<size_t>(l)].matrix();
        }
        CHECK((p - w.g.matrix()).norm() / p.norm() < 1e-12);
    }
    CHECK(words[0].letters == std::vector<int>{0});
    CHECK(words[2].letters.size() == 2);
    CHECK(enumerate_words(GeneratorSet{}, 5).empty());
}

TEST_CASE("presets") {
    for (const auto& [name, n] : std::vector<std::pair<std::string, int>>{{"slplus2", 2}, {"slplus3", 3}}) {
        const auto g = make_preset(name, n);
        CHECK_FALSE(g.gens.empty());
        for (const auto& e : g.gens) {
            CHECK(e.dim() == n);
            CHECK(e.matrix().minCoeff() > 0.0);
            CHECK(e.matrix().determinant() == doctest::Approx(1.0));
        }
    }
    CHECK(make_preset("full-group", 2).gens.size() == 2);
    CHECK(make_preset("full-group", 3).gens.size() == 3);
    CHECK_THROWS_AS(make_preset("nonsense", 2), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("slplus3", 2), std::invalid_argument);
}

TEST_CASE("graph with no generators or the identity") {
    const auto c = sample_space(Space::PROJ, 2, 90, 0);
    const auto empty = build_reach_graph(GeneratorSet{}, c, default_epsilon(c), 3);
    CHECK(empty.edge_count() == 0);
    CHECK(find_control_sets(empty).empty());

    const GeneratorSet id{{GroupElement::identity(2)}, "identity"};
    const auto self = build_reach_graph(id, c, default_epsilon(c), 3);
    CHECK(self.edge_count() == c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        const auto [b, e] = self.out(i);
        REQUIRE(e - b == 1);
        CHECK(*b == static_cast<int32_t>(i));
    }
}

TEST_CASE("reachability on the circle matches the closed-form angle map") {
    const GeneratorSet g{{GroupElement(m2(2, 1, 1, 1)), GroupElement(m2(1, 1, 1, 2))}, "spec pair"};
    const auto cloud = sample_space(Space::K, 2, 360, 0);
    const int depth = 8;
    const auto graph = build_reach_graph(g, cloud, default_epsilon(cloud), depth);

    // theta -> atan2 of g (cos theta, sin theta), composed over all words
    const std::vector<Matrix> mats{m2(2, 1, 1, 1), m2(1, 1, 1, 2)};
    std::set<std::pair<int, int>> oracle;
    for (int i = 0; i < 360; ++i) {
        std::function<void(double, int)> walk = [&](double t, int len) {
            if (len == depth) {
                return;
            }
            for (const Matrix& m : mats) {
                const double x = m(0, 0) * std::cos(t) + m(0, 1) * std::sin(t);
                const double y = m(1, 0) * std::cos(t) + m(1, 1) * std::sin(t);
                const double u = std::atan2(y, x);
                int j = static_cast<int>(std::lround(deg(u))) % 360;
                j = j < 0 ? j + 360 : j;
                oracle.emplace(i, j);
                walk(u, len + 1);
            }
        };
        walk(i * M_PI / 180.0, 0);
    }
    CHECK(edge_set(graph) == oracle);

    // the attractor is a Cantor set between the attracting eigenlines at
    // atan(1/phi) and atan(phi); the grid sees it as one strongly connected core
    // that every point of the open positive quadrant reaches
    const auto reach = closure(360, oracle);
    const double lo = deg(std::atan(2.0 / (1.0 + std::sqrt(5.0))));
    const double hi = 90.0 - lo;
    const auto records = find_control_sets(graph);
    // on the circle the antipodal arc is the second invariant set
    CHECK(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.invariant; }) == 2);
    const auto it = std::find_if(records.begin(), records.end(),
                                 [](const auto& r) { return r.invariant && r.core_indices.front() < 90; });
    REQUIRE(it != records.end());
    for (int32_t a : it->core_indices) {
        CHECK(a >= std::floor(lo));
        CHECK(a <= std::ceil(hi));
        for (int32_t b : it->core_indices) {
            CHECK(reach[static_cast<size_t>(a)][static_cast<size_t>(b)]);
        }
    }
    CHECK(std::binary_search(it->core_indices.begin(), it->core_indices.end(), static_cast<int32_t>(std::lround(lo))));
    CHECK(std::binary_search(it->core_indices.begin(), it->core_indices.end(), static_cast<int32_t>(std::lround(hi))));
    for (size_t i = 1; i < 90; ++i) {
        CHECK(reach[i][static_cast<size_t>(it->core_indices.front())]);
    }
    // and nothing outside the core is reached from inside it
    for (size_t j = 0; j < 360; ++j) {
        if (!std::binary_search(it->core_indices.begin(), it->core_indices.end(), static_cast<int32_t>(j))) {
            CHECK_FALSE(reach[static_cast<size_t>(it->core_indices.front())][j]);
        }
    }
}

TEST_CASE("control sets of hand-made graphs") {
    std::vector<std::pair<int, int>> complete;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            complete.emplace_back(i, j);
        }
    }
    const auto g = graph_from_edges(10, complete);
    const auto records = find_control_sets(g);
    REQUIRE(records.size() == 1);
    CHECK(records[0].member_indices.size() == 10);
    CHECK(records[0].invariant);
    CHECK(classify_invariant(records[0], g));
    CHECK(order_control_sets(records, g).empty());

    // two cycles, the first draining into the second
    const auto chain = graph_from_edges(10, {{0, 1}, {1, 2}, {2, 0}, {2, 5}, {5, 6}, {6, 7}, {7, 5}});
    const auto two = find_control_sets(chain, 2);
    REQUIRE(two.size() == 2);
    CHECK_FALSE(two[0].invariant);
    CHECK(two[1].invariant);
    CHECK(two[0].order_rank == 0);
    CHECK(two[1].order_rank == 1);
    const auto order = order_control_sets(two, chain);
    CHECK(std::find(order.begin(), order.end(), std::make_pair(0, 1)) != order.end());

    // records that reach each other should have merged
    ControlSetRecord a;
    a.id = 0;
    a.member_indices = a.core_indices = {0, 1, 2, 3, 4};
    ControlSetRecord b;
    b.id = 1;
    b.member_indices = b.core_indices = {5, 6, 7, 8, 9};
    CHECK_THROWS_AS(order_control_sets({a, b}, g), CycleError);
    CHECK(default_min_core_size(10) == 2);
    CHECK(default_min_core_size(20000) == 100);
}

TEST_CASE("SL(2) on the projective line") {
    const auto gens = make_preset("slplus2", 2);
    for (int count : {180, 720, 1440}) {
        const auto cloud = sample_space(Space::PROJ, 2, count, 0);
        const auto run = run_control_sets(gens, cloud, default_epsilon(cloud), 8);
        REQUIRE(run.records.size() == 2);
        const auto& inv = run.records[0].invariant ? run.records[0] : run.records[1];
        const auto& other = run.records[0].invariant ? run.records[1] : run.records[0];
        CHECK_FALSE(other.invariant);
        CHECK(classify_invariant(inv, run.graph));
        CHECK_FALSE(classify_invariant(other, run.graph));
        // the invariant set is the positive quadrant
        for (int32_t i : inv.member_indices) {
            CHECK(line_angle(cloud, static_cast<size_t>(i)) <= 90.0 + 1e-9);
        }
        const auto order = order_control_sets(run.records, run.graph);
        CHECK(order == std::vector<std::pair<int, int>>{{other.id, inv.id}});
        if (count < 720) {
            // a 1 degree grid snaps the repelling lines onto the quadrant edge
            continue;
        }
        REQUIRE(inv.w_labels.size() == 1);
        CHECK(inv.w_labels[0].is_identity());
        REQUIRE(other.w_labels.size() == 1);
        CHECK(other.w_labels[0] == WeylElement::transposition(2, 0, 1));
    }
}

TEST_CASE("SL(2) on the circle") {
    const auto gens = make_preset("slplus2", 2);
    for (int count : {1440, 2880}) {
        const auto cloud = sample_space(Space::K, 2, count, 0);
        const auto run = run_control_sets(gens, cloud, default_epsilon(cloud), 8);
        REQUIRE(run.records.size() == 4);
        int invariant = 0;
        std::set<SignedPermutation> labels;
        for (const auto& r : run.records) {
            invariant += r.invariant;
            REQUIRE(r.u_labels.size() == 1);
            labels.insert(r.u_labels[0]);
            // attractor types sit exactly in the invariant sets
            CHECK(weyl_class(r.u_labels[0]).is_identity() == r.invariant);
        }
        CHECK(invariant == 2);
        CHECK(labels.size() == 4);

        // each record lies in its quadrant: the one through its fixed point
        const std::vector<std::pair<SignedPermutation, double>> quadrant{
            {SignedPermutation({0, 1}, {1, 1}), 0.0},
            {SignedPermutation({1, 0}, {-1, 1}), 90.0},
            {SignedPermutation({0, 1}, {-1, -1}), 180.0},
            {SignedPermutation({1, 0}, {1, -1}), 270.0}};
        for (const auto& [u, start] : quadrant) {
            const auto& r = with_label(run.records, u);
            for (int32_t i : r.member_indices) {
                double off = angle_of(cloud, static_cast<size_t>(i)) - start;
                off = off < -1.0 ? off + 360.0 : off;
                CHECK(off >= -1e-9);
                CHECK(off <= 90.0 + 1e-9);
            }
        }
        const auto order = order_control_sets(run.records, run.graph);
        auto has = [&](const SignedPermutation& a, const SignedPermutation& b) {
            const std::pair<int, int> p{with_label(run.records, a).id, with_label(run.records, b).id};
            return std::find(order.begin(), order.end(), p) != order.end();
        };
        // both transient quadrants drain into both invariant ones
        for (size_t from : {1, 3}) {
            for (size_t to : {0, 2}) {
                CHECK(has(quadrant[from].first, quadrant[to].first));
            }
        }
        CHECK(order.size() == 4);
    }
}

TEST_CASE("the full group has a single control set") {
    const auto gens = make_preset("full-group", 2);
    const auto cloud = sample_space(Space::K, 2, 720, 0);
    const auto run = run_control_sets(gens, cloud, default_epsilon(cloud), 8);
    REQUIRE(run.records.size() == 1);
    CHECK(run.records[0].invariant);
    CHECK(run.records[0].member_indices.size() == cloud.size());
    CHECK(run.records[0].u_labels.size() == 4);
}

TEST_CASE("labeling needs a regular element") {
    const GeneratorSet rot{{GroupElement(m2(std::cos(1.0), -std::sin(1.0), std::sin(1.0), std::cos(1.0)))}, "rotation"};
    const auto cloud = sample_space(Space::K, 2, 360, 0);
    const auto graph = build_reach_graph(rot, cloud, default_epsilon(cloud), 4);
    auto records = find_control_sets(graph);
    REQUIRE_FALSE(records.empty());
    CHECK_THROWS_AS(label_control_sets(records, graph, rot), NoRegularElementError);
}

TEST_CASE("runs are deterministic across thread counts") {
    const auto gens = make_preset("slplus3", 3);
    const auto cloud = sample_space(Space::K, 3, 1500, 4);
    const double eps = default_epsilon(cloud);
    const auto a = run_control_sets(gens, cloud, eps, 4, 1);
    const auto b = run_control_sets(gens, cloud, eps, 4, 3);
    CHECK(a.graph.offsets == b.graph.offsets);
    CHECK(a.graph.targets == b.graph.targets);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].member_indices == b.records[i].member_indices);
        CHECK(a.records[i].core_indices == b.records[i].core_indices);
        CHECK(a.records[i].u_labels == b.records[i].u_labels);
        CHECK(a.records[i].order_rank == b.records[i].order_rank);
    }
}

TEST_CASE("record invariants") {
    const auto gens = make_preset("slplus2", 2);
    const auto cloud = sample_space(Space::K, 2, 720, 0);
    const auto run = run_control_sets(gens, cloud, default_epsilon(cloud), 8);
    const auto member = membership(run.records, cloud.size());
    for (const auto& r : run.records) {
        CHECK(std::includes(r.member_indices.begin(), r.member_indices.end(), r.core_indices.begin(),
                            r.core_indices.end()));
        CHECK(std::is_sorted(r.member_indices.begin(), r.member_indices.end()));
        if (r.invariant) {
            for (int32_t i : r.core_indices) {
                const auto [b, e] = run.graph.out(static_cast<size_t>(i));
                for (const int32_t* t = b; t != e; ++t) {
                    CHECK(member[static_cast<size_t>(*t)] == r.id);
                }
            }
        }
    }
    CHECK(anchor_record(run.records) >= 0);
    CHECK(run.records[static_cast<size_t>(anchor_record(run.records))].invariant);
}

TEST_CASE("typed fixed points by space") {
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 4.0, 1.0, 0.25;
    const GroupElement h(d);
    CHECK(typed_fixed_points(Space::K, h).size() == 24);
    CHECK(typed_fixed_points(Space::FLAG, h).size() == 6);
    CHECK(typed_fixed_points(Space::PROJ, h).size() == 3);
    for (const auto& t : typed_fixed_points(Space::K, h)) {
        CHECK(t.u.has_value());
        CHECK_FALSE(t.w.has_value());
    }
}
