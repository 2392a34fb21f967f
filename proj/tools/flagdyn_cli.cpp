#include "flagdyn/errors.hpp"
#include "flagdyn/serialization.hpp"
#include "flagdyn/theorem_verifier.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace flagdyn;
namespace fs = std::filesystem;

namespace {

// exit codes
constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;
constexpr int kRank = 3;

struct BadInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int n = 2;
    std::string space = "ALL";
    std::string preset;
    std::string generators;  // file
    std::optional<Json> inline_generators;
    int cloud_count = 0;  // 0: 1440 for n = 2, 20000 otherwise
    uint64_t seed = 1;
    std::optional<double> epsilon;
    std::optional<int> word_depth;
    double collar = 1.0;  // in units of epsilon
    std::string output_dir = ".";
    std::vector<std::string> theorems;
};

struct Flags {
    std::string config;
    RunConfig cli;
    std::map<std::string, CLI::Option*> opts;
    std::string theorems;

    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_run_options(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON config file; flags override its fields");
    f.opts["n"] = cmd->add_option("--n", f.cli.n, "matrix size (2, 3 or 4)");
    f.opts["space"] = cmd->add_option("--space", f.cli.space, "K, FLAG, PROJ or ALL");
    f.opts["preset"] = cmd->add_option("--preset", f.cli.preset, "slplus2, slplus3 or full-group");
    f.opts["generators"] = cmd->add_option("--generators", f.cli.generators, "JSON file with generator matrices");
    f.opts["cloud_count"] = cmd->add_option("--cloud-count", f.cli.cloud_count, "samples on K");
    f.opts["seed"] = cmd->add_option("--seed", f.cli.seed, "sampling and verification seed");
    f.opts["epsilon"] = cmd->add_option("--epsilon", f.cli.epsilon, "matching radius (default 2 x dispersion)");
    f.opts["word_depth"] = cmd->add_option("--word-depth", f.cli.word_depth, "longest generator word");
    f.opts["collar"] = cmd->add_option("--collar", f.cli.collar, "boundary collar in units of epsilon");
    f.opts["output_dir"] = cmd->add_option("--output-dir", f.cli.output_dir, "directory for output files");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw BadInput("cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw BadInput(path + ": " + e.what());
    }
}

std::vector<std::string> split_tags(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) {
            out.push_back(tok);
        }
    }
    return out;
}

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config.empty()) {
        const Json j = read_json_file(f.config);
        try {
            c.n = j.value("n", c.n);
            c.space = j.value("space", c.space);
            c.preset = j.value("preset", c.preset);
            if (j.contains("generators")) {
                if (j["generators"].is_string()) {
                    c.generators = j["generators"].get<std::string>();
                } else {
                    c.inline_generators = j["generators"];
                }
            }
            c.cloud_count = j.value("cloud_count", c.cloud_count);
            c.seed = j.value("seed", c.seed);
            if (j.contains("epsilon")) {
                c.epsilon = j["epsilon"].get<double>();
            }
            if (j.contains("word_depth")) {
                c.word_depth = j["word_depth"].get<int>();
            }
            c.collar = j.value("collar", c.collar);
            c.output_dir = j.value("output_dir", c.output_dir);
            if (j.contains("theorems")) {
                c.theorems = j["theorems"].get<std::vector<std::string>>();
            }
        } catch (const Json::exception& e) {
            throw BadInput(f.config + ": " + e.what());
        }
    }
    const RunConfig& o = f.cli;
    if (f.given("n")) c.n = o.n;
    if (f.given("space")) c.space = o.space;
    if (f.given("preset")) c.preset = o.preset;
    if (f.given("generators")) {
        c.generators = o.generators;
        c.inline_generators.reset();
    }
    if (f.given("cloud_count")) c.cloud_count = o.cloud_count;
    if (f.given("seed")) c.seed = o.seed;
    if (f.given("epsilon")) c.epsilon = o.epsilon;
    if (f.given("word_depth")) c.word_depth = o.word_depth;
    if (f.given("collar")) c.collar = o.collar;
    if (f.given("output_dir")) c.output_dir = o.output_dir;
    if (!f.theorems.empty()) c.theorems = split_tags(f.theorems);

    std::transform(c.space.begin(), c.space.end(), c.space.begin(), ::toupper);
    if (c.n < 2 || c.n > 4) {
        throw BadInput("n must be 2, 3 or 4");
    }
    if (c.space != "ALL" && c.space != "K" && c.space != "FLAG" && c.space != "PROJ") {
        throw BadInput("unknown space " + c.space);
    }
    if (c.cloud_count == 0) {
        c.cloud_count = c.n == 2 ? 1440 : 20000;
    }
    if (c.cloud_count < 10) {
        throw BadInput("cloud count must be at least 10");
    }
    if (c.epsilon && *c.epsilon <= 0.0) {
        throw BadInput("epsilon must be positive");
    }
    if (c.word_depth && *c.word_depth < 1) {
        throw BadInput("word depth must be at least 1");
    }
    return c;
}

GeneratorSet load_generators(const RunConfig& c) {
    try {
        GeneratorSet g;
        if (c.inline_generators) {
            g = generators_from_json(*c.inline_generators);
        } else if (!c.generators.empty()) {
            g = generators_from_json(read_json_file(c.generators));
        } else {
            g = make_preset(c.preset.empty() ? (c.n == 2 ? "slplus2" : "slplus3") : c.preset, c.n);
        }
        if (!g.gens.empty() && g.gens.front().dim() != c.n) {
            throw BadInput("generators are " + std::to_string(g.gens.front().dim()) + " x " +
                           std::to_string(g.gens.front().dim()) + " but n = " + std::to_string(c.n));
        }
        return g;
    } catch (const std::invalid_argument& e) {
        throw BadInput(e.what());
    } catch (const InvalidGroupElementError& e) {
        throw BadInput(e.what());
    }
}

std::vector<Space> spaces_of(const RunConfig& c) {
    if (c.space == "ALL") {
        return {c.n == 2 ? Space::PROJ : Space::FLAG, Space::K};
    }
    return {parse_space(c.space)};
}

// K cloud plus the clouds of the other spaces; FLAG is pi of K so fibers match
struct Clouds {
    SampleCloud k;
    ProjectedCloud flag;
};

Clouds make_clouds(const RunConfig& c) {
    Clouds out{sample_space(Space::K, c.n, c.cloud_count, c.seed), {}};
    out.flag = project_cloud(out.k);
    return out;
}

SampleCloud cloud_for(Space s, const RunConfig& c, const Clouds& clouds) {
    switch (s) {
        case Space::K:
            return clouds.k;
        case Space::FLAG:
            return clouds.flag.cloud;
        case Space::PROJ:
            return sample_space(Space::PROJ, c.n, c.n == 2 ? c.cloud_count / 2 : c.cloud_count, c.seed);
    }
    return clouds.k;
}

ControlSetRun run_space(const GeneratorSet& g, const SampleCloud& cloud, const RunConfig& c) {
    const double eps = c.epsilon ? *c.epsilon : default_epsilon(cloud);
    const int depth = c.word_depth ? *c.word_depth : default_word_depth(c.n);
    return run_control_sets(g, cloud, eps, depth);
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    out << s;
}

void write_outputs(const fs::path& dir, Space s, const ControlSetRun& run) {
    const std::string tag = to_string(s);
    Json doc{{"metadata", metadata_header()},
             {"epsilon", run.graph.epsilon},
             {"word_depth", run.graph.word_depth},
             {"records", records_to_json(run.records, s)}};
    write_text(dir / ("control_sets_" + tag + ".json"), doc.dump(2) + "\n");
    std::ofstream g(dir / ("graph_" + tag + ".jsonl"));
    write_graph_jsonl(g, run.graph);
    write_text(dir / ("points_" + tag + ".json"), points_to_json(run.graph.cloud, run.records).dump() + "\n");
}

std::string summary_of(Space s, const std::vector<ControlSetRecord>& records) {
    const auto inv = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.invariant; });
    return to_string(s) + ": " + std::to_string(records.size()) + " (" + std::to_string(inv) + " invariant)";
}

void print_table(Space s, const std::vector<ControlSetRecord>& records) {
    for (const auto& r : records) {
        std::cout << "  " << to_string(s) << " #" << r.id << "  size " << std::setw(6) << r.member_indices.size()
                  << "  core " << std::setw(6) << r.core_indices.size() << "  " << (r.invariant ? "invariant" : "         ")
                  << "  rank " << r.order_rank << "  labels";
        for (const auto& u : r.u_labels) {
            std::cout << ' ' << u.to_string();
        }
        for (const auto& w : r.w_labels) {
            std::cout << ' ' << w.to_string();
        }
        std::cout << '\n';
    }
}

int cmd_decompose(const std::string& text) {
    Matrix m;
    try {
        m = parse_matrix_text(text);
    } catch (const std::invalid_argument& e) {
        throw BadInput(e.what());
    }
    std::optional<GroupElement> g;
    try {
        g.emplace(m);
    } catch (const InvalidGroupElementError& e) {
        throw BadInput(e.what());
    }
    const IwasawaTriple t = iwasawa_decompose(*g);
    const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
    std::cout << "k =\n" << t.k.format(fmt) << "\na =\n" << t.a_matrix().format(fmt) << "\nn =\n"
              << t.nfac.format(fmt) << "\nreconstruction error " << (t.reconstruct() - g->matrix()).norm() / g->matrix().norm()
              << '\n';
    return kOk;
}

int cmd_control_sets(const RunConfig& c) {
    const GeneratorSet g = load_generators(c);
    fs::create_directories(c.output_dir);
    const Clouds clouds = make_clouds(c);
    std::vector<std::string> parts;
    size_t total = 0;
    for (Space s : spaces_of(c)) {
        const ControlSetRun run = run_space(g, cloud_for(s, c, clouds), c);
        write_outputs(c.output_dir, s, run);
        total += run.records.size();
        parts.push_back(summary_of(s, run.records));
        print_table(s, run.records);
    }
    if (total == 0) {
        std::cout << "0 control sets\n";
        return kOk;
    }
    std::string line;
    for (const auto& p : parts) {
        line += (line.empty() ? "" : "; ") + p;
    }
    std::cout << line << '\n';
    return kOk;
}

const std::vector<std::string>& known_tags() {
    static const std::vector<std::string> tags{"counting",         "WS",         "CS",
                                               "fiber-unions",     "conjugacy",  "pi-compatibility",
                                               "right-translation", "nu-decomposition", "transitivity-fixed-points"};
    return tags;
}

VerificationReport subgroup_report(const std::string& tag, const std::function<std::string()>& body) {
    VerificationReport r{tag, false, 0.0, 0.0, ""};
    try {
        r.details = body();
        r.passed = true;
    } catch (const NotASubgroupError& e) {
        r.details = e.what();
    }
    return r;
}

int cmd_verify(RunConfig c) {
    if (c.theorems.empty()) {
        c.theorems = {"counting"};
    }
    if (c.theorems.size() == 1 && c.theorems.front() == "all") {
        c.theorems = known_tags();
    }
    for (const auto& t : c.theorems) {
        if (std::find(known_tags().begin(), known_tags().end(), t) == known_tags().end()) {
            throw BadInput("unknown theorem tag " + t);
        }
    }
    const bool needs_runs = std::any_of(c.theorems.begin(), c.theorems.end(),
                                        [](const auto& t) { return t != "nu-decomposition"; });
    fs::create_directories(c.output_dir);

    std::optional<GeneratorSet> g;
    std::optional<Clouds> clouds;
    std::optional<ControlSetRun> k_run;
    std::optional<ControlSetRun> f_run;
    if (needs_runs) {
        g = load_generators(c);
        clouds = make_clouds(c);
        k_run = run_space(*g, clouds->k, c);
        f_run = run_space(*g, clouds->flag.cloud, c);
    }
    std::vector<VerificationReport> reports;
    for (const auto& t : c.theorems) {
        if (t == "counting") {
            reports.push_back(verify_counting(*k_run, *f_run));
        } else if (t == "WS") {
            reports.push_back(subgroup_report("WS", [&] {
                const auto ws = compute_WS(f_run->records);
                std::string s = "W(S) =";
                for (const auto& w : ws) {
                    s += " " + w.to_string();
                }
                return s;
            }));
            reports.back().lhs = reports.back().passed ? static_cast<double>(compute_WS(f_run->records).size()) : 0.0;
        } else if (t == "CS") {
            reports.push_back(subgroup_report("CS", [&] {
                const auto cs = compute_CS(*k_run);
                std::string s = "C(S) =";
                for (const auto& m : cs) {
                    s += " " + m.to_string();
                }
                // every invariant record must give the same subgroup
                for (const auto& r : k_run->records) {
                    if (r.invariant && stabilizer_in_M(*k_run, r.id) != cs) {
                        throw NotASubgroupError("invariant record " + std::to_string(r.id) +
                                                " has a different stabilizer");
                    }
                }
                return s;
            }));
            reports.back().lhs = reports.back().passed ? static_cast<double>(compute_CS(*k_run).size()) : 0.0;
        } else if (t == "fiber-unions") {
            const double e = c.collar;
            reports.push_back(verify_fiber_unions(*k_run, *f_run, clouds->flag.image_of, e * k_run->graph.epsilon,
                                                  e * f_run->graph.epsilon));
        } else if (t == "conjugacy") {
            reports.push_back(verify_conjugacy_CSw(*k_run, *f_run, clouds->flag.image_of));
        } else if (t == "pi-compatibility") {
            reports.push_back(
                verify_pi_compatibility(*k_run, *f_run, clouds->flag.image_of, c.collar * k_run->graph.epsilon));
        } else if (t == "right-translation") {
            reports.push_back(verify_right_translation_covariance(*k_run, c.collar * k_run->graph.epsilon));
        } else if (t == "nu-decomposition") {
            if (c.n > 3) {
                throw BadInput("nu-decomposition supports n = 2, 3");
            }
            for (const auto& u : enumerate_Mstar(c.n)) {
                reports.push_back(verify_nu_decomposition(u, 100, c.seed));
            }
        } else if (t == "transitivity-fixed-points") {
            const int depth = c.word_depth ? *c.word_depth : default_word_depth(c.n);
            reports.push_back(verify_transitivity_fixed_points(*k_run, *g, c.n == 2 ? 50 : 20, c.seed, depth));
        }
    }
    Json arr = Json::array();
    bool ok = true;
    for (const auto& r : reports) {
        arr.push_back(report_to_json(r));
        ok = ok && r.passed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.theorem_tag << "  lhs " << r.lhs << "  rhs " << r.rhs << "  "
                  << r.details << '\n';
    }
    write_text(fs::path(c.output_dir) / "verify.json",
               Json{{"metadata", metadata_header()}, {"reports", arr}}.dump(2) + "\n");
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control sets of matrix semigroups on K, flag and projective spaces"};
    app.require_subcommand(1);

    std::string matrix;
    auto* dec = app.add_subcommand("decompose", "Iwasawa factors g = k a n");
    dec->add_option("--matrix", matrix, "JSON nested array or whitespace text, rows split by ';'")->required();

    Flags cs_flags;
    auto* cs = app.add_subcommand("control-sets", "compute and export control sets");
    add_run_options(cs, cs_flags);

    Flags vf_flags;
    auto* vf = app.add_subcommand("verify", "check structure theorems on computed control sets");
    add_run_options(vf, vf_flags);
    vf->add_option("--theorems", vf_flags.theorems, "comma-separated tags, or 'all'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    try {
        if (dec->parsed()) {
            return cmd_decompose(matrix);
        }
        if (cs->parsed()) {
            return cmd_control_sets(resolve(cs_flags));
        }
        return cmd_verify(resolve(vf_flags));
    } catch (const BadInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const NumericalRankError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRank;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
}
