#pragma once

#include "causalkit/discovery.hpp"
#include "causalkit/harness.hpp"

#include "json.hpp"

#include <string>

namespace causalkit {

using Json = nlohmann::json;

// Graph files: {"vars": [names], "directed": [[src,tgt]], "undirected":
// [[a,b]], "marks": [{"triple": [x,y,z], "mark": "..."}]}; mixed graphs add
// "definite_nonadjacent": [[a,b]]. Indices refer to "vars".
Json dag_to_json(const Dag& g);
Dag dag_from_json(const Json& j);
Json mixed_graph_to_json(const MixedGraph& g);
MixedGraph mixed_graph_from_json(const Json& j);
Json pattern_to_json(const Pattern& p);
Pattern pattern_from_json(const Json& j);

// Model files: {"family": ..., "dag": ..., family-specific blocks}.
Json model_to_json(const CausalModel& m);
CausalModel model_from_json(const Json& j);

// Dataset CSV with a header row of variable names; the sidecar metadata
// records the seed and the column schema.
std::string dataset_to_csv(const Dataset& ds);
Json dataset_meta_to_json(const Dataset& ds);
Dataset dataset_from_csv(const std::string& csv, const Json* meta = nullptr);

// Estimate files: per vertex either "unknown" or {parents, bins, parent_bins,
// table}.
Json estimated_model_to_json(const EstimatedModel& est);
EstimatedModel estimated_model_from_json(const Json& j);

// Trace files: a JSON array of step events.
Json trace_to_json(const VcsgsTrace& trace);

Json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const Json& j);
std::string report_to_csv(const ExperimentReport& report);

std::string read_file(const std::string& path);
// Writes to a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace causalkit
