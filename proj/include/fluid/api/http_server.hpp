// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "fluid/api/control_api.hpp"

namespace fluid {

// HTTP/1.1 front end for ControlApi with permissive CORS headers.
class HttpServer {
 public:
  explicit HttpServer(Engine& engine);
  ~HttpServer();

  // Binds and serves until stop(). Returns false when the bind fails.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fluid
