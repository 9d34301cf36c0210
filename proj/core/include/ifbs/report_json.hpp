#pragma once

#include <nlohmann/json.hpp>

#include "ifbs/analysis.hpp"
#include "ifbs/schedule.hpp"

namespace ifbs {

// JSON documents for the diagnostic reports. Field names follow the struct
// members; absent optionals serialize as null and infinities as strings.
nlohmann::json to_json(const ValidityReport& r);
nlohmann::json to_json(const ManifoldReport& r);
nlohmann::json to_json(const RateReport& r);
nlohmann::json to_json(const ReferenceSolution& r);

}  // namespace ifbs
