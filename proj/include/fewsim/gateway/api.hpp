#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "fewsim/middleware/case_manager.hpp"

namespace fewsim::gateway {

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

/// `body` is the envelope: {"status":"ok","payload":...} or {"status":"error","error":{code,message}}.
struct ApiResponse {
    int status = 200;
    nlohmann::json body;
    std::map<std::string, std::string> headers;
};

struct RouteInfo {
    std::string method;
    std::string pattern;
    std::string summary;
};

nlohmann::json ok_envelope(nlohmann::json payload);
nlohmann::json error_envelope(std::string_view code, std::string_view message, std::string_view hint = {});

/// REST handlers over a CaseManager. Stateless apart from a read cache of scenario documents;
/// safe to call from concurrent server threads.
class Api {
public:
    explicit Api(middleware::CaseManager& manager);
    ~Api();

    ApiResponse handle(const ApiRequest& request) const;

    /// Every route handle() serves.
    static const std::vector<RouteInfo>& routes();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fewsim::gateway
