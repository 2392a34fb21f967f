#include "flagdyn/serialization.hpp"

#include <chrono>
#include <ctime>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace flagdyn {

namespace {

Json one_based(const std::vector<int>& perm) {
    Json a = Json::array();
    for (int p : perm) {
        a.push_back(p + 1);
    }
    return a;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    const auto n = rows.size();
    if (n == 0) {
        throw std::invalid_argument("empty matrix");
    }
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw std::invalid_argument("matrix is not square");
        }
        for (size_t j = 0; j < n; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) {
        throw std::invalid_argument("matrix must be a nested array");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) {
        if (!r.is_array()) {
            throw std::invalid_argument("matrix rows must be arrays");
        }
        std::vector<double> row;
        for (const auto& x : r) {
            if (!x.is_number()) {
                throw std::invalid_argument("matrix entries must be numbers");
            }
            row.push_back(x.get<double>());
        }
        rows.push_back(std::move(row));
    }
    return from_rows(rows);
}

Matrix parse_matrix_text(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            return matrix_from_json(Json::parse(text));
        } catch (const Json::exception& e) {
            throw std::invalid_argument(std::string("bad matrix: ") + e.what());
        }
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::string normalized = text;
    for (char& c : normalized) {
        if (c == ';') {
            c = '\n';
        }
    }
    std::istringstream lines(normalized);
    while (std::getline(lines, line)) {
        std::istringstream in(line);
        std::vector<double> row;
        std::string tok;
        while (in >> tok) {
            size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) {
                throw std::invalid_argument("bad matrix entry '" + tok + "'");
            }
            row.push_back(v);
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
    }
    return from_rows(rows);
}

Json label_to_json(const SignedPermutation& u) {
    return Json{{"name", u.to_string()}, {"perm", one_based(u.perm())}, {"signs", u.signs()}};
}

Json label_to_json(const WeylElement& w) { return Json{{"name", w.to_string()}, {"perm", one_based(w.perm())}}; }

Json record_to_json(const ControlSetRecord& r, Space space) {
    Json labels = Json::array();
    for (const auto& u : r.u_labels) {
        labels.push_back(label_to_json(u));
    }
    for (const auto& w : r.w_labels) {
        labels.push_back(label_to_json(w));
    }
    return Json{{"id", r.id},
                {"space", to_string(space)},
                {"size", r.member_indices.size()},
                {"core_size", r.core_indices.size()},
                {"invariant", r.invariant},
                {"labels", labels},
                {"order_rank", r.order_rank}};
}

Json records_to_json(const std::vector<ControlSetRecord>& records, Space space) {
    Json a = Json::array();
    for (const auto& r : records) {
        a.push_back(record_to_json(r, space));
    }
    return a;
}

void write_graph_jsonl(std::ostream& out, const ReachGraph& graph) {
    for (size_t i = 0; i < graph.size(); ++i) {
        const auto [b, e] = graph.out(i);
        for (const int32_t* t = b; t != e; ++t) {
            out << "{\"src\":" << i << ",\"dst\":" << *t << "}\n";
        }
    }
}

Json points_to_json(const SampleCloud& cloud, const std::vector<ControlSetRecord>& records) {
    const std::vector<int> member = membership(records, cloud.size());
    std::vector<bool> core(cloud.size(), false);
    for (const auto& r : records) {
        for (int32_t i : r.core_indices) {
            core[static_cast<size_t>(i)] = true;
        }
    }
    Json pts = Json::array();
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Matrix p = cloud.point(i);
        Json coords = cloud.space == Space::PROJ ? Json(std::vector<double>(p.data(), p.data() + p.size()))
                                                 : matrix_to_json(p);
        pts.push_back(Json{{"index", i}, {"coords", coords}, {"record", member[i]}, {"core", core[i]}});
    }
    return Json{{"space", to_string(cloud.space)}, {"n", cloud.n}, {"seed", cloud.seed}, {"points", pts}};
}

Json report_to_json(const VerificationReport& r) {
    return Json{{"theorem_tag", r.theorem_tag},
                {"passed", r.passed},
                {"lhs", r.lhs},
                {"rhs", r.rhs},
                {"details", r.details}};
}

Json metadata_header() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return Json{{"generated_at", buf}, {"tool", "flagdyn"}};
}

GeneratorSet generators_from_json(const Json& j) {
    const Json& list = j.is_object() ? j.at("generators") : j;
    if (!list.is_array()) {
        throw std::invalid_argument("generators must be an array of matrices");
    }
    GeneratorSet out;
    for (const auto& m : list) {
        Matrix g = matrix_from_json(m);
        if (!out.gens.empty() && g.rows() != out.gens.front().dim()) {
            throw std::invalid_argument("generators differ in size");
        }
        out.gens.emplace_back(std::move(g));
    }
    out.description = "explicit (" + std::to_string(out.gens.size()) + " generators)";
    return out;
}

}  // namespace flagdyn
