#pragma once

// JSON export of matrices, labels, control-set records, graphs, sample
// points and verification reports, plus matrix and generator parsing.

#include "flagdyn/semigroup_engine.hpp"
#include "flagdyn/theorem_verifier.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace flagdyn {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays.
Json matrix_to_json(const Matrix& m);

/// Accepts a square nested array of numbers. Throws std::invalid_argument.
Matrix matrix_from_json(const Json& j);

/// A JSON nested array, or whitespace-separated numbers with rows split by
/// newlines or ';'. Throws std::invalid_argument on ragged or non-square input.
Matrix parse_matrix_text(const std::string& text);

/// {"name", "perm" (1-based images), "signs"}.
Json label_to_json(const SignedPermutation& u);
/// {"name", "perm" (1-based images)}.
Json label_to_json(const WeylElement& w);

/// {id, space, size, core_size, invariant, labels, order_rank}.
Json record_to_json(const ControlSetRecord& r, Space space);
Json records_to_json(const std::vector<ControlSetRecord>& records, Space space);

/// One {"src", "dst"} object per line, in CSR order.
void write_graph_jsonl(std::ostream& out, const ReachGraph& graph);

/// Coordinates of every sample with its record id (-1 outside all records)
/// and whether it lies in a core. K and FLAG points are row-major matrices.
Json points_to_json(const SampleCloud& cloud, const std::vector<ControlSetRecord>& records);

Json report_to_json(const VerificationReport& r);

/// {"generated_at": ISO-8601 UTC time, "tool": "flagdyn"}.
Json metadata_header();

/// A nested array of matrices or {"generators": [...]}, all of one size.
/// Throws std::invalid_argument on shape errors and InvalidGroupElementError
/// on matrices outside the group.
GeneratorSet generators_from_json(const Json& j);

}  // namespace flagdyn
