#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "fewsim/gateway/api.hpp"

namespace fewsim::gateway {

struct ServeConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path ui_dir;  // static bundle served under "/" when it exists
};

/// HTTP front end for an Api. start() returns once the port is bound.
class HttpServer {
public:
    HttpServer(const Api& api, ServeConfig config);
    ~HttpServer();

    /// Throws Error when the port cannot be bound.
    void start();
    /// Blocks until stop() is called from another thread.
    void wait();
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fewsim::gateway
