#pragma once

#include "selfscore/orchestrator.hpp"

#include <json.hpp>

namespace selfscore {

using Json = nlohmann::ordered_json;

Json to_json(const ComplexityAssessment& c);
ComplexityAssessment complexity_from_json(const Json& j);

Json to_json(const WeightVector& w);
WeightVector weights_from_json(const Json& j);

/// {"kind": "uniform"|"split"|"per_turn", price fields..., "currency"}.
Json to_json(const CostModel& m);
CostModel cost_model_from_json(const Json& j);

Json to_json(const InteractionScore& s);
InteractionScore score_from_json(const Json& j);

Json to_json(const ScoringOptions& o);
ScoringOptions scoring_options_from_json(const Json& j);

Json to_json(const TurnRecord& t);
TurnRecord turn_from_json(const Json& j);

/// Self-contained interaction record. Decoding throws ConfigError on a
/// structurally invalid document.
Json to_json(const InteractionResult& r);
InteractionResult result_from_json(const Json& j);

} // namespace selfscore
