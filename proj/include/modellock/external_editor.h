/* Copyright 2026 The ModelLock Authors. All Rights Reserved.

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

// Client side of the editor wire protocol (version 1) plus a reference
// request handler.
//
// Every request and response is one UTF-8 JSON document:
//
//   request  {"version":1, "mode":"edit"|"echo", "prompt":..., "salt":...,
//             "steps":..., "guidance":..., "image_guidance":..., "seed":...,
//             "image":{"h":..,"w":..,"c":..,"data":<base64 LE f32>}}
//   response {"version":1, "image":{...}}
//            {"version":1, "error":{"code":..., "message":...}}
//
// Transports: HTTP POST /edit (GET /capabilities), or newline-delimited
// documents over a child process's stdin/stdout.

#ifndef MODELLOCK_EXTERNAL_EDITOR_H_
#define MODELLOCK_EXTERNAL_EDITOR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modellock/editor.h"
#include "modellock/tensor.h"

namespace modellock {

inline constexpr int kEditorProtocolVersion = 1;

enum class EditMode { kEdit, kEcho };

struct EditRequest {
  EditMode mode = EditMode::kEdit;
  std::string prompt;
  std::optional<std::string> salt;
  int steps = 5;
  float guidance = 4.5f;
  float image_guidance = 1.5f;
  std::uint64_t seed = 0;
  Image image;
};

nlohmann::json ImageToWire(const Image& image);
// Throws kFormat on malformed payloads.
Image ImageFromWire(const nlohmann::json& doc);

std::string EncodeEditRequest(const EditRequest& request);
EditRequest DecodeEditRequest(std::string_view text);

// Parses a response. Throws kProtocolVersion on a version other than 1,
// kRemote on an error document, kShapeMismatch when the returned image
// differs in shape from `expected_shape`, kFormat on anything unparseable.
Image DecodeEditResponse(std::string_view text, const Image& expected_shape);

std::string EncodeImageResponse(const Image& image);
std::string EncodeErrorResponse(std::string_view code, std::string_view message);

// In-process implementation of the service contract: "echo" returns the
// image, "edit" runs the procedural editor with the request's key and seed.
// Never throws; failures become error documents ("bad-request",
// "unsupported-version").
std::string HandleEditorRequest(std::string_view request_text);

// Capabilities document served at GET /capabilities.
nlohmann::json ReferenceCapabilities();

// Returns the problems found in a capabilities document; empty means it
// passes (version 1, "echo" among the modes, room for 256x256x3 images).
std::vector<std::string> CheckCapabilities(const nlohmann::json& doc);

class ExternalEditorClient {
 public:
  virtual ~ExternalEditorClient() = default;

  // "http://host:port" or "stdio:<command line>".
  static std::unique_ptr<ExternalEditorClient> Connect(const std::string& endpoint);

  // Sends one request document and returns the raw response text. Throws
  // kTransport on connection failures.
  virtual std::string RoundTrip(const std::string& request) = 0;
  virtual nlohmann::json Capabilities() = 0;

  Image Edit(const Image& image, const EditKey& key, const EditorConfig& cfg,
             std::uint64_t seed, EditMode mode = EditMode::kEdit);
};

}  // namespace modellock

#endif  // MODELLOCK_EXTERNAL_EDITOR_H_
