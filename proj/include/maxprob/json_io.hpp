#pragma once

// JSON encoding of the distspace types and a deterministic JSON writer.
//
// Distributions are written in linear space as {"range": [...], "probs": [...]}.
// Every real is printed with 17 significant digits ("%.17g"), so zero mass is
// the literal 0 and output bytes depend only on the values. Non-finite reals
// have no JSON spelling and are written as null.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "maxprob/distspace.hpp"

namespace maxprob {

using Json = nlohmann::ordered_json;

std::string format_real(double x);
std::string dump_json(const Json& j);

Json to_json(const OutcomeRange& range);
Json to_json(const FiniteDistribution& dist);
Json to_json(const Refinement& r);
Json to_json(const Parameterization& p);
Json to_json(const EventModel& m);

OutcomeRange range_from_json(const Json& j);
FiniteDistribution distribution_from_json(const Json& j);
Refinement refinement_from_json(const Json& j);
Parameterization parameterization_from_json(const Json& j);
EventModel event_model_from_json(const Json& j);

// Reads a JSON document from a path, or from stdin when path is "-".
// Throws FileNotFound or ParseError.
Json read_json_file(const std::string& path);

}  // namespace maxprob
