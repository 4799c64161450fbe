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

#include "iterdraw/service.hpp"

#include <thread>

#include "httplib.h"
#include "iterdraw/image_io.hpp"
#include "json.hpp"

namespace iterdraw {

using json = nlohmann::json;

namespace {

HttpReply reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpReply error_reply(int status, const std::string& message) { return reply(status, {{"error", message}}); }

int status_for(SessionErrorKind kind) {
  switch (kind) {
    case SessionErrorKind::kBadRequest:
      return 400;
    case SessionErrorKind::kNotFound:
      return 404;
    case SessionErrorKind::kConflict:
      return 409;
    case SessionErrorKind::kUnprocessable:
      return 422;
  }
  return 500;
}

std::string png_b64(const ImageGrid& image) { return base64_encode(encode_png(image)); }

json session_json(const SessionSnapshot& s) {
  json history = json::array();
  int turn = 0;
  for (const auto& entry : s.history) {
    history.push_back({{"turn_index", ++turn}, {"instruction", entry.instruction}, {"image_b64", png_b64(entry.image)}});
  }
  return {{"session_id", s.id},
          {"checkpoint", s.checkpoint},
          {"seed", s.seed},
          {"initial_image_b64", png_b64(s.initial_image)},
          {"canvas_b64", png_b64(s.canvas)},
          {"history", history}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (const char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json doc = json::parse(body);
  if (!doc.is_object()) throw SessionError(SessionErrorKind::kBadRequest, "request body must be a JSON object");
  return doc;
}

}  // namespace

HttpReply SessionService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    const auto parts = split_path(path);
    if (parts.size() == 1 && parts[0] == "checkpoints" && method == "GET") {
      return reply(200, {{"checkpoints", sessions_.checkpoints()}, {"default", sessions_.default_checkpoint()}});
    }
    if (parts.empty() || parts[0] != "sessions") return error_reply(404, "no route for " + path);
    if (parts.size() == 1) {
      if (method != "POST") return error_reply(405, "method not allowed");
      const auto doc = parse_body(body);
      std::optional<std::string> checkpoint;
      if (doc.contains("checkpoint") && !doc["checkpoint"].is_null()) {
        checkpoint = doc["checkpoint"].get<std::string>();
        if (checkpoint->empty()) checkpoint.reset();
      }
      std::optional<ImageGrid> initial;
      if (doc.contains("initial_image_b64") && !doc["initial_image_b64"].is_null()) {
        try {
          initial = decode_png(base64_decode(doc["initial_image_b64"].get<std::string>()));
        } catch (const std::exception& e) {
          return error_reply(400, std::string("initial_image_b64 is not a PNG: ") + e.what());
        }
      }
      std::optional<std::uint64_t> seed;
      if (doc.contains("seed") && !doc["seed"].is_null()) seed = doc["seed"].get<std::uint64_t>();
      const auto id = sessions_.create(checkpoint, initial, seed);
      return reply(201, session_json(sessions_.get(id)));
    }
    const auto& id = parts[1];
    if (parts.size() == 2) {
      if (method == "GET") return reply(200, session_json(sessions_.get(id)));
      if (method == "DELETE") {
        sessions_.remove(id);
        return reply(200, {{"session_id", id}, {"deleted", true}});
      }
      return error_reply(405, "method not allowed");
    }
    if (parts.size() == 3 && method == "POST" && parts[2] == "steps") {
      const auto doc = parse_body(body);
      if (!doc.contains("instruction") || !doc["instruction"].is_string()) {
        return error_reply(400, "instruction must be a string");
      }
      const auto result = sessions_.step(id, doc["instruction"].get<std::string>());
      return reply(200, {{"session_id", id}, {"turn_index", result.turn_index}, {"image_b64", png_b64(result.image)}});
    }
    if (parts.size() == 3 && method == "POST" && parts[2] == "undo") {
      return reply(200, session_json(sessions_.undo(id)));
    }
    return error_reply(404, "no route for " + method + " " + path);
  } catch (const SessionError& e) {
    return error_reply(status_for(e.kind()), e.what());
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(SessionService& s) : service(s) {
    auto forward = [this](const httplib::Request& request, httplib::Response& response) {
      const auto out = service.handle(request.method, request.path, request.body);
      response.status = out.status;
      response.set_content(out.body, out.content_type);
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    const std::string any = R"(/.*)";
    server.Get(any, forward);
    server.Post(any, forward);
    server.Delete(any, forward);
    server.Put(any, forward);
    server.Patch(any, forward);
    server.Options(any, [](const httplib::Request&, httplib::Response& response) { response.status = 204; });
    server.set_payload_max_length(64 * 1024 * 1024);
  }
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace iterdraw
