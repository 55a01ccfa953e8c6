#pragma once

#include "json.hpp"

#include "fewsim/middleware/store.hpp"

namespace fewsim {

void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);

}  // namespace fewsim

namespace fewsim::middleware {

void to_json(nlohmann::json& j, const VariableAdjustment& a);
void from_json(const nlohmann::json& j, VariableAdjustment& a);
void to_json(nlohmann::json& j, const CaseConfig& c);
void from_json(const nlohmann::json& j, CaseConfig& c);
void to_json(nlohmann::json& j, const ScenarioProgress& p);
void from_json(const nlohmann::json& j, ScenarioProgress& p);
void to_json(nlohmann::json& j, const JobRecord& r);
void from_json(const nlohmann::json& j, JobRecord& r);
void to_json(nlohmann::json& j, const CaseManifest& m);
void from_json(const nlohmann::json& j, CaseManifest& m);

nlohmann::json document_to_json(const ScenarioDocument& doc);
ScenarioDocument document_from_json(const nlohmann::json& j);

}  // namespace fewsim::middleware
