/* Copyright 2026 The iterdraw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ITERDRAW_SERVICE_HPP_
#define ITERDRAW_SERVICE_HPP_

#include <memory>
#include <string>

#include "iterdraw/session.hpp"

namespace iterdraw {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// JSON routes over a SessionManager:
//   GET    /checkpoints
//   POST   /sessions                {checkpoint?, initial_image_b64?, seed?}
//   GET    /sessions/{id}
//   POST   /sessions/{id}/steps     {instruction}
//   POST   /sessions/{id}/undo
//   DELETE /sessions/{id}
// Errors are {"error": message} with 400, 404, 409 or 422.
class SessionService {
 public:
  explicit SessionService(SessionManager& sessions) : sessions_(sessions) {}

  HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

 private:
  SessionManager& sessions_;
};

// Serves a SessionService over HTTP on a background thread.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from another thread or a signal.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace iterdraw

#endif  // ITERDRAW_SERVICE_HPP_
