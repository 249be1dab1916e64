// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "fluid/engine.hpp"

namespace fluid {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

int http_status(ErrorCode code);
nlohmann::json error_body(ErrorCode code, const std::string& message);

// Transport-independent route table. The HTTP server and in-process callers
// (tests, the scenario driver) go through the same handler.
class ControlApi {
 public:
  explicit ControlApi(Engine& engine) : engine_(engine) {}

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& params, const std::string& body);

 private:
  ApiResponse post_dpr(const nlohmann::json& body);
  ApiResponse delete_dpr(const std::string& id);
  ApiResponse list_dprs();
  ApiResponse registry(const std::map<std::string, std::string>& params);
  ApiResponse query(const nlohmann::json& body);
  ApiResponse metrics(const std::map<std::string, std::string>& params);
  ApiResponse set_manager(const nlohmann::json& body);
  ApiResponse get_manager();
  ApiResponse fusion();
  ApiResponse set_fusion(const nlohmann::json& body);
  ApiResponse ingest(const std::string& body);

  Engine& engine_;
};

}  // namespace fluid
