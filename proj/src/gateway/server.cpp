#include "fewsim/gateway/server.hpp"

#include <thread>

#include <fmt/core.h>

#include "httplib.h"

#include "fewsim/core/errors.hpp"

namespace fewsim::gateway {

struct HttpServer::Impl {
    const Api& api;
    ServeConfig config;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    Impl(const Api& a, ServeConfig c) : api(a), config(std::move(c)) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            ApiRequest r;
            r.method = req.method;
            r.path = req.path;
            for (const auto& [k, v] : req.params) r.query[k] = v;
            r.body = req.body;
            auto out = api.handle(r);
            for (const auto& [k, v] : out.headers) res.set_header(k, v);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        const char* pattern = R"(/api/.*)";
        server.Get(pattern, handler);
        server.Post(pattern, handler);
        server.Put(pattern, handler);
        server.Delete(pattern, handler);
        std::error_code ec;
        if (!config.ui_dir.empty() && std::filesystem::is_directory(config.ui_dir, ec)) {
            server.set_mount_point("/", config.ui_dir.string());
        }
    }
};

HttpServer::HttpServer(const Api& api, ServeConfig config) : impl_(std::make_unique<Impl>(api, std::move(config))) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
    auto& s = impl_->server;
    if (impl_->config.port == 0) {
        impl_->port = s.bind_to_any_port(impl_->config.host);
    } else {
        impl_->port = s.bind_to_port(impl_->config.host, impl_->config.port) ? impl_->config.port : -1;
    }
    if (impl_->port <= 0) {
        throw Error(fmt::format("cannot bind {}:{} (port busy?)", impl_->config.host, impl_->config.port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const { return impl_->port; }

}  // namespace fewsim::gateway
