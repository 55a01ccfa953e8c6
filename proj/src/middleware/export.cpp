#include "fewsim/middleware/export.hpp"

#include <fmt/ostream.h>

namespace fewsim::middleware {

void write_results_header(std::ostream& out) { out << "scenario,branch,year,variable,value,unit\n"; }

void write_results_csv(std::ostream& out, const ScenarioDocument& doc) {
    const auto& name = doc.result.spec.name;
    for (const auto& [branch, vars] : doc.annual) {
        for (int i = 0;; ++i) {
            bool any = false;
            for (const auto& [var, s] : vars) {
                if (static_cast<std::size_t>(i) >= s.values.size()) continue;
                any = true;
                fmt::print(out, "{},{},{},{},{},{}\n", name, branch, s.first_year + i, var, s.values[i], to_string(s.unit));
            }
            if (!any) break;
        }
    }
}

void write_indices_header(std::ostream& out) { out << "scenario,year,index,value,flagged\n"; }

void write_indices_csv(std::ostream& out, const std::vector<indices::IndexVector>& rows) {
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < indices::kIndexCount; ++i) {
            const auto& v = row.values[i];
            fmt::print(out, "{},{},{},{},{}\n", row.scenario, row.year, indices::to_string(static_cast<indices::Index>(i)),
                       v.value, v.flagged ? 1 : 0);
        }
    }
}

}  // namespace fewsim::middleware
