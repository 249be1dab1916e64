// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/api/http_server.hpp"

#include <httplib.h>

namespace fluid {

struct HttpServer::Impl {
  explicit Impl(Engine& e) : api(e) {}
  ControlApi api;
  httplib::Server server;
  std::mutex api_mu;  // serializes mutating routes
};

namespace {

void cors(httplib::Response& res) {
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
  res.set_header("Access-Control-Allow-Headers", "Content-Type");
}

}  // namespace

HttpServer::HttpServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> params;
    for (const auto& [k, v] : req.params) params[k] = v;
    ApiResponse r;
    if (req.method == "GET") {
      r = impl_->api.handle(req.method, req.path, params, req.body);
    } else {
      std::lock_guard lk(impl_->api_mu);
      r = impl_->api.handle(req.method, req.path, params, req.body);
    }
    cors(res);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.Get(R"(/.*)", handler);
  s.Post(R"(/.*)", handler);
  s.Delete(R"(/.*)", handler);
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    cors(res);
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace fluid
