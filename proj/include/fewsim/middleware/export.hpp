#pragma once

#include <ostream>
#include <vector>

#include "fewsim/indices/indices.hpp"
#include "fewsim/middleware/store.hpp"

namespace fewsim::middleware {

/// Annual results as CSV: scenario,branch,year,variable,value,unit.
void write_results_header(std::ostream& out);
void write_results_csv(std::ostream& out, const ScenarioDocument& doc);

/// Indices as CSV: scenario,year,index,value,flagged.
void write_indices_header(std::ostream& out);
void write_indices_csv(std::ostream& out, const std::vector<indices::IndexVector>& rows);

}  // namespace fewsim::middleware
