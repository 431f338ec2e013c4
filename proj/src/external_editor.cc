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

#include "modellock/external_editor.h"

#include <signal.h>
#include <sodium.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <mutex>

#include "httplib.h"
#include "modellock/error.h"

namespace modellock {
namespace {

using nlohmann::json;

constexpr int kMaxImageSide = 1024;

std::string Base64Encode(std::span<const std::uint8_t> bytes) {
  std::string out(sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(),
                    sodium_base64_VARIANT_ORIGINAL);
  out.resize(std::strlen(out.c_str()));
  return out;
}

std::vector<std::uint8_t> Base64Decode(std::string_view text) {
  std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len,
                        nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw Error(ErrorCode::kFormat, "image data is not valid base64");
  }
  out.resize(len);
  return out;
}

json ParseDocument(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("not a JSON document: ") + e.what());
  }
}

void CheckVersion(const json& doc) {
  if (!doc.is_object() || !doc.contains("version")) {
    throw Error(ErrorCode::kFormat, "document has no version field");
  }
  if (!doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kEditorProtocolVersion) {
    throw Error(ErrorCode::kProtocolVersion,
                "peer speaks protocol version " + doc["version"].dump());
  }
}

class HttpEditorClient : public ExternalEditorClient {
 public:
  explicit HttpEditorClient(const std::string& endpoint) : client_(endpoint) {
    if (!client_.is_valid()) {
      throw Error(ErrorCode::kTransport, "invalid HTTP endpoint '" + endpoint + "'");
    }
    client_.set_connection_timeout(5);
    client_.set_read_timeout(120);
  }

  std::string RoundTrip(const std::string& request) override {
    auto res = client_.Post("/edit", request, "application/json");
    if (!res) {
      throw Error(ErrorCode::kTransport,
                  "POST /edit failed: " + httplib::to_string(res.error()));
    }
    return res->body;
  }

  json Capabilities() override {
    auto res = client_.Get("/capabilities");
    if (!res) {
      throw Error(ErrorCode::kTransport,
                  "GET /capabilities failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kTransport,
                  "GET /capabilities returned HTTP " + std::to_string(res->status));
    }
    return ParseDocument(res->body);
  }

 private:
  httplib::Client client_;
};

// Child process speaking newline-delimited documents on stdin/stdout. A
// socketpair stands in for the pipes so writes to a dead child fail with
// EPIPE instead of raising SIGPIPE.
class StdioEditorClient : public ExternalEditorClient {
 public:
  explicit StdioEditorClient(const std::string& command) {
    int fds[2];
    if (socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
      throw Error(ErrorCode::kTransport, std::string("socketpair: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) {
      close(fds[0]);
      close(fds[1]);
      throw Error(ErrorCode::kTransport, std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      close(fds[0]);
      dup2(fds[1], STDIN_FILENO);
      dup2(fds[1], STDOUT_FILENO);
      close(fds[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(fds[1]);
    fd_ = fds[0];
  }

  ~StdioEditorClient() override {
    if (fd_ >= 0) {
      shutdown(fd_, SHUT_WR);
      close(fd_);
    }
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  std::string RoundTrip(const std::string& request) override {
    std::lock_guard<std::mutex> lock(mu_);
    std::string line = request;
    line.push_back('\n');
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kTransport, std::string("write to editor: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
    return ReadLine();
  }

  json Capabilities() override {
    return ParseDocument(RoundTrip(json{{"version", kEditorProtocolVersion},
                                        {"mode", "capabilities"}}.dump()));
  }

 private:
  std::string ReadLine() {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      char chunk[65536];
      const ssize_t n = recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        throw Error(ErrorCode::kTransport, "editor process closed its output");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::mutex mu_;
  int fd_ = -1;
  pid_t pid_ = -1;
  std::string buffer_;
};

}  // namespace

json ImageToWire(const Image& image) {
  const auto pixels = image.data();
  return json{{"h", image.height()},
              {"w", image.width()},
              {"c", image.channels()},
              {"data", Base64Encode(std::span<const std::uint8_t>(
                           reinterpret_cast<const std::uint8_t*>(pixels.data()),
                           pixels.size_bytes()))}};
}

Image ImageFromWire(const json& doc) {
  if (!doc.is_object() || !doc.contains("h") || !doc.contains("w") || !doc.contains("c") ||
      !doc.contains("data") || !doc["data"].is_string()) {
    throw Error(ErrorCode::kFormat, "image object needs h, w, c and data");
  }
  const int h = doc["h"].get<int>(), w = doc["w"].get<int>(), c = doc["c"].get<int>();
  if (h <= 0 || w <= 0 || h > kMaxImageSide || w > kMaxImageSide || (c != 1 && c != 3)) {
    throw Error(ErrorCode::kFormat, "image dimensions out of range");
  }
  const auto bytes = Base64Decode(doc["data"].get<std::string>());
  const std::size_t count = static_cast<std::size_t>(h) * w * c;
  if (bytes.size() != count * sizeof(float)) {
    throw Error(ErrorCode::kFormat, "image payload length does not match h*w*c");
  }
  std::vector<float> data(count);
  std::memcpy(data.data(), bytes.data(), bytes.size());
  try {
    return Image(h, w, c, std::move(data));
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, e.what());
  }
}

std::string EncodeEditRequest(const EditRequest& request) {
  json doc{{"version", kEditorProtocolVersion},
           {"mode", request.mode == EditMode::kEcho ? "echo" : "edit"},
           {"prompt", request.prompt},
           {"steps", request.steps},
           {"guidance", request.guidance},
           {"image_guidance", request.image_guidance},
           {"seed", request.seed},
           {"image", ImageToWire(request.image)}};
  if (request.salt.has_value()) doc["salt"] = *request.salt;
  return doc.dump();
}

EditRequest DecodeEditRequest(std::string_view text) {
  const json doc = ParseDocument(text);
  CheckVersion(doc);
  try {
    EditRequest r;
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode == "echo") {
      r.mode = EditMode::kEcho;
    } else if (mode == "edit") {
      r.mode = EditMode::kEdit;
    } else {
      throw Error(ErrorCode::kFormat, "unknown mode '" + mode + "'");
    }
    r.prompt = doc.value("prompt", std::string());
    if (doc.contains("salt") && !doc["salt"].is_null()) r.salt = doc["salt"].get<std::string>();
    r.steps = doc.value("steps", 5);
    r.guidance = doc.value("guidance", 4.5f);
    r.image_guidance = doc.value("image_guidance", 1.5f);
    r.seed = doc.value("seed", std::uint64_t{0});
    r.image = ImageFromWire(doc.at("image"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed request: ") + e.what());
  }
}

Image DecodeEditResponse(std::string_view text, const Image& expected_shape) {
  const json doc = ParseDocument(text);
  CheckVersion(doc);
  if (doc.contains("error")) {
    const auto& err = doc["error"];
    throw Error(ErrorCode::kRemote, err.value("code", std::string("unknown")) + ": " +
                                        err.value("message", std::string()));
  }
  if (!doc.contains("image")) throw Error(ErrorCode::kFormat, "response has no image");
  Image image = ImageFromWire(doc["image"]);
  if (!image.SameShape(expected_shape)) {
    throw Error(ErrorCode::kShapeMismatch,
                "editor returned " + std::to_string(image.height()) + "x" +
                    std::to_string(image.width()) + "x" + std::to_string(image.channels()) +
                    ", expected " + std::to_string(expected_shape.height()) + "x" +
                    std::to_string(expected_shape.width()) + "x" +
                    std::to_string(expected_shape.channels()));
  }
  return image;
}

std::string EncodeImageResponse(const Image& image) {
  return json{{"version", kEditorProtocolVersion}, {"image", ImageToWire(image)}}.dump();
}

std::string EncodeErrorResponse(std::string_view code, std::string_view message) {
  return json{{"version", kEditorProtocolVersion},
              {"error", {{"code", code}, {"message", message}}}}
      .dump();
}

std::string HandleEditorRequest(std::string_view request_text) {
  try {
    const json doc = ParseDocument(request_text);
    if (doc.is_object() && doc.value("mode", std::string()) == "capabilities") {
      return ReferenceCapabilities().dump();
    }
    const EditRequest req = DecodeEditRequest(request_text);
    if (req.mode == EditMode::kEcho) return EncodeImageResponse(req.image);
    const EditKey key = req.prompt.empty() ? EditKey::EmptyPrompt(req.salt)
                                           : EditKey(req.prompt, req.salt);
    return EncodeImageResponse(ApplyEdit(req.image, DeriveEditParams(key), req.seed));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocolVersion) {
      return EncodeErrorResponse("unsupported-version", e.what());
    }
    return EncodeErrorResponse("bad-request", e.what());
  } catch (const std::exception& e) {
    return EncodeErrorResponse("internal", e.what());
  }
}

json ReferenceCapabilities() {
  return json{{"version", kEditorProtocolVersion},
              {"modes", {"echo", "edit"}},
              {"editor", "procedural"},
              {"max_image", {{"h", kMaxImageSide}, {"w", kMaxImageSide}, {"c", 3}}}};
}

std::vector<std::string> CheckCapabilities(const json& doc) {
  std::vector<std::string> problems;
  if (!doc.is_object()) return {"capabilities document is not an object"};
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kEditorProtocolVersion) {
    problems.push_back("version is not 1");
  }
  bool has_echo = false;
  if (doc.contains("modes") && doc["modes"].is_array()) {
    for (const auto& m : doc["modes"]) has_echo |= m.is_string() && m.get<std::string>() == "echo";
  }
  if (!has_echo) problems.push_back("modes do not include echo");
  const auto max = doc.value("max_image", json::object());
  if (!max.is_object() || max.value("h", 0) < 256 || max.value("w", 0) < 256 ||
      max.value("c", 0) < 3) {
    problems.push_back("max image size below 256x256x3");
  }
  return problems;
}

std::unique_ptr<ExternalEditorClient> ExternalEditorClient::Connect(const std::string& endpoint) {
  constexpr std::string_view kStdio = "stdio:";
  if (endpoint.rfind(kStdio, 0) == 0) {
    return std::make_unique<StdioEditorClient>(endpoint.substr(kStdio.size()));
  }
  if (endpoint.rfind("http://", 0) == 0) return std::make_unique<HttpEditorClient>(endpoint);
  throw Error(ErrorCode::kConfig, "endpoint must start with http:// or stdio:");
}

Image ExternalEditorClient::Edit(const Image& image, const EditKey& key,
                                 const EditorConfig& cfg, std::uint64_t seed, EditMode mode) {
  EditRequest req;
  req.mode = mode;
  req.prompt = key.prompt();
  req.salt = key.salt();
  req.steps = cfg.steps;
  req.guidance = cfg.guidance;
  req.image_guidance = cfg.image_guidance;
  req.seed = seed;
  req.image = image;
  return DecodeEditResponse(RoundTrip(EncodeEditRequest(req)), image);
}

}  // namespace modellock
