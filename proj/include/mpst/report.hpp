#pragma once

// JSON and DOT renderings of checker, analysis, inference and metatheory
// results. Key order and contents depend only on the inputs, so equal runs
// give byte-identical output.

#include "json.hpp"

#include "mpst/analysis.hpp"
#include "mpst/inference.hpp"
#include "mpst/metatheory.hpp"
#include "mpst/semantics.hpp"
#include "mpst/typing.hpp"

namespace mpst {

using Json = nlohmann::ordered_json;

Json to_json(const ParticipantSet& ps);
Json to_json(const Judgment& j);
Json to_json(const DerivationNode& d);
Json to_json(const Rejection& r);
Json to_json(const TypecheckResult& r);
Json to_json(const LivenessVerdict& v);
Json to_json(const Boundedness& b, const GlobalGraph& g);
Json to_json(const StateGraph& g);
Json to_json(const EquationSystems& s);
Json to_json(const InferredSolution& s, bool with_equations);
Json to_json(const InferResult& r, bool with_equations);
Json to_json(const MetaReport& r);
Json to_json(const FileMetaReport& r);

std::string to_dot(const StateGraph& g);
std::string to_dot(const DerivationNode& d);

}  // namespace mpst
