#pragma once

#include <json.hpp>

#include "sqlab/adversary.hpp"
#include "sqlab/blowup.hpp"
#include "sqlab/embedder.hpp"
#include "sqlab/regularity.hpp"
#include "sqlab/square_walk.hpp"

namespace sqlab {

using Json = nlohmann::json;

Json to_json(const Fraction& f);
Json to_json(const SquarePath& p);
Json to_json(const SquareCycle& c);
Json to_json(const RegularityReport& r);
Json to_json(const AttackResult& a, const AdversarySpec& spec);
Json to_json(const PruneResult& p);
Json to_json(const GtildeIIReport& r);
Json to_json(const EmbeddingTrace& t);
Json to_json(const PartitionResult& p);

/// Vertex sequence read back from a serialized path or cycle ({"vertices": [...]}).
std::vector<Vertex> vertices_from_json(const Json& j);

}  // namespace sqlab
