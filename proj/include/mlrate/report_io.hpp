#pragma once

#include <json.hpp>
#include <ostream>

#include "mlrate/estimators.hpp"
#include "mlrate/sim.hpp"

namespace mlrate {

nlohmann::json report_to_json(const EstimateReport& report);

nlohmann::json study_to_json(const CoverageStudyResult& result);

// Flat per-repetition records: one row per rep per method.
void study_records_csv(std::ostream& out, const CoverageStudyResult& result,
                       const std::vector<MethodSpec>& methods);

}  // namespace mlrate
