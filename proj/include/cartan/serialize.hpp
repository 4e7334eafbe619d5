#pragma once

#include <string>

#include <json.hpp>

#include "cartan/cone.hpp"
#include "cartan/evidence.hpp"
#include "cartan/holonomy.hpp"
#include "cartan/transport.hpp"

namespace cartan {

using Json = nlohmann::ordered_json;

/// JSON text with two-space indentation and every floating-point number
/// printed with 17 significant digits, so reports round-trip exactly and are
/// byte-stable across runs.
std::string dump_json(const Json& j);

/// Writes via a temporary file in the same directory and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

Json to_json(const Vec& v);
Json to_json(const Mat& m);  // array of rows
Json to_json(const AffineIsometry& h);
Json to_json(const Tolerances& t);
Json to_json(const Protocol& p);
Json to_json(const LoopSpec& l);
Json to_json(const FixedPointResult& fp);
Json to_json(const HolonomySample& s, const std::string& manifold);
Json to_json(const ClassificationReport& r);
Json to_json(const ConeCertificate& c);
Json to_json(const EvidenceReport& e);

std::string to_csv(const DevelopmentTrace& trace);

Vec vec_from_json(const nlohmann::json& j, const char* what);
Mat mat_from_json(const nlohmann::json& j, const char* what);
AffineIsometry affine_from_json(const nlohmann::json& j);

/// Overrides on top of `base`; unknown keys and wrong types raise
/// ConfigInvalid.
Tolerances tolerances_from_json(const nlohmann::json& j, Tolerances base = {});
Protocol protocol_from_json(const nlohmann::json& j, Protocol base = {});

}  // namespace cartan
