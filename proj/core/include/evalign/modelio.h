// Copyright 2026 The evalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVALIGN_MODELIO_H_
#define EVALIGN_MODELIO_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evalign/error.h"
#include "evalign/promptkit.h"

namespace evalign {

struct GenerationParams {
  enum class Decoding { kGreedy, kSample };

  int max_new_tokens = 10;
  Decoding decoding = Decoding::kGreedy;
  double temperature = 1.0;
  double top_p = 1.0;
  std::vector<std::string> stop_sequences;
  std::optional<std::uint64_t> seed;

  // Throws kInvalidArgument on max_new_tokens < 1 or non-positive sampling
  // temperature.
  void Validate() const;

  static GenerationParams ShortAnswer() { return {}; }
  static GenerationParams Caption() { return WithMaxTokens(64); }
  static GenerationParams LongForm() { return WithMaxTokens(512); }

 private:
  static GenerationParams WithMaxTokens(int n) {
    GenerationParams p;
    p.max_new_tokens = n;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Wire protocol.
//
// Request (UTF-8 JSON, POST <endpoint>/v1/generate):
//   {"segments": [{"type": "image", "value": <uri>} |
//                 {"type": "text", "value": <string>}, ...],
//    "params": {"max_new_tokens": int, "decoding": "greedy" | "sample",
//               "temperature": number, "top_p": number,
//               "stop": [string, ...], "seed": int (optional)}}
// Response 200: {"text": <string>, "usage": {"prompt_tokens": int,
//                                           "completion_tokens": int}}
// 413 or {"error": {"type": "capacity"}}: prompt too large for the endpoint.

struct WireRequest {
  InterleavedPrompt prompt;
  GenerationParams params;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct WireResponse {
  std::string text;
  Usage usage;
};

std::string EncodeRequest(const InterleavedPrompt& prompt,
                          const GenerationParams& params);
// Image segments decode with id == uri == the wire locator.
WireRequest DecodeRequest(std::string_view body);
std::string EncodeResponse(const WireResponse& response);
// Throws kProtocol when "text" is missing or mistyped.
WireResponse DecodeResponse(std::string_view body);

// ---------------------------------------------------------------------------
// Transport.

struct TransportReply {
  // 0 means the connection itself failed.
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportReply Send(std::string_view request_body) = 0;
  virtual std::string id() const = 0;
};

struct EndpointConfig {
  // scheme://host:port
  std::string url;
  std::string path = "/v1/generate";
  std::string bearer_token;
  std::chrono::milliseconds timeout{30000};
};

std::shared_ptr<Transport> MakeHttpTransport(const EndpointConfig& config);

struct ClientOptions {
  std::size_t max_inflight = 4;
  // Retries after the first attempt on transient failures.
  int retry_budget = 3;
  std::chrono::milliseconds backoff{20};
};

struct GenerationExchange {
  InterleavedPrompt prompt;
  GenerationParams params;
  // Raw, untruncated model text.
  std::string output;
  std::chrono::microseconds latency{0};
  std::string endpoint_id;
  int attempts = 1;
};

struct ExchangeOutcome {
  std::optional<GenerationExchange> exchange;
  std::optional<ErrorKind> error_kind;
  std::string error_message;

  bool ok() const { return exchange.has_value(); }
};

class Client {
 public:
  Client(std::shared_ptr<Transport> transport, ClientOptions options = {});

  // Blocks while `max_inflight` calls are already outstanding. Throws
  // kEndpoint after the retry budget, kProtocol on malformed replies and
  // kCapacity when the endpoint rejects the prompt size.
  GenerationExchange Generate(const InterleavedPrompt& prompt,
                              const GenerationParams& params);

  // Fans out over at most `max_inflight` workers; results keep input order
  // and failures are captured per item.
  std::vector<ExchangeOutcome> GenerateAll(std::span<const WireRequest> requests);

  const ClientOptions& options() const { return options_; }
  std::string endpoint_id() const { return transport_->id(); }
  std::size_t peak_in_flight() const { return peak_in_flight_.load(); }

 private:
  std::shared_ptr<Transport> transport_;
  ClientOptions options_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> peak_in_flight_{0};
};

// ---------------------------------------------------------------------------
// Judge.

struct JudgeVerdict {
  double score = 0.0;
  std::string rationale;
  std::optional<double> reference_score;
};

// The bundled judge prompt; placeholders {instruction}, {ground_truth} and
// {response}.
std::string_view DefaultJudgeTemplate();

std::string RenderJudgePrompt(std::string_view judge_template,
                              std::string_view instruction,
                              std::string_view ground_truth,
                              std::string_view response);

// Reads "score: N" (or a bare leading number). Two numbers on the first line
// are (reference, candidate). Throws kJudgeProtocol when no score is found or
// a score falls outside [0, 10].
JudgeVerdict ParseJudgeReply(std::string_view reply);

class Judge {
 public:
  Judge(std::shared_ptr<Client> client,
        std::string judge_template = std::string(DefaultJudgeTemplate()),
        GenerationParams params = GenerationParams::LongForm());

  JudgeVerdict Score(std::string_view response, std::string_view ground_truth,
                     std::string_view instruction);

  // Builds the text-only request that Score sends.
  WireRequest Request(std::string_view response, std::string_view ground_truth,
                      std::string_view instruction) const;

  Client& client() { return *client_; }

 private:
  std::shared_ptr<Client> client_;
  std::string template_;
  GenerationParams params_;
};

// ---------------------------------------------------------------------------
// Mock endpoint.
//
// Script (JSON):
//   {"image_marker": "<image>",            // used by echo of "wire"
//    "rules": [ ... first match wins ... ],
//    "default": <string>}                  // reply when no rule matches
// Rule kinds ("on" selects "query" = last text segment (default) or "wire"):
//   {"type": "echo"}
//   {"type": "fixed", "reply": s}
//   {"type": "contains", "needle": s, "reply": s}
//   {"type": "regex", "pattern": re, "reply": s}        // $1.. expand
//   {"type": "lookup", "table": {key: reply}, "key_pattern": re}
//   {"type": "regex_equal", "pattern": re, "if_equal": s, "otherwise": s}
//   {"type": "fail", "status": int, "times": int}        // transient errors
//   {"type": "capacity", "max_images": int}              // 413 above limit
//   {"type": "delay", "ms": int}                         // then falls through
class MockScript {
 public:
  MockScript() = default;
  MockScript(MockScript&& other) noexcept;
  MockScript& operator=(MockScript&& other) noexcept;

  static MockScript Parse(std::string_view json);
  static MockScript Load(const std::string& path);

  // Thread-safe.
  TransportReply Handle(std::string_view request_body);

  std::size_t requests_seen() const { return requests_seen_.load(); }

 private:
  struct Rule {
    enum class Kind {
      kEcho,
      kFixed,
      kContains,
      kRegex,
      kLookup,
      kRegexEqual,
      kFail,
      kCapacity,
      kDelay,
    };
    Kind kind = Kind::kFixed;
    bool on_wire = false;
    std::string text_a;
    std::string text_b;
    std::optional<std::regex> pattern;
    std::vector<std::pair<std::string, std::string>> table;
    int number = 0;
    int times = 0;
  };

  std::string image_marker_ = "<image>";
  std::vector<Rule> rules_;
  std::string default_reply_;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  std::vector<int> fail_counts_;
  std::atomic<std::size_t> requests_seen_{0};
};

// Serves a MockScript in-process without sockets.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(MockScript script, std::string id = "scripted");
  TransportReply Send(std::string_view request_body) override;
  std::string id() const override { return id_; }
  std::size_t peak_in_flight() const { return peak_.load(); }

 private:
  MockScript script_;
  std::string id_;
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
};

// HTTP server for a MockScript. Port 0 binds an ephemeral port. Throws
// kPortBusy when the port cannot be bound. GET /v1/stats reports
// {"requests": n, "in_flight": k, "peak_in_flight": m}.
class MockServer {
 public:
  explicit MockServer(MockScript script, int port = 0,
                      std::string host = "127.0.0.1");
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  std::string url() const;
  std::size_t requests_served() const;
  std::size_t peak_in_flight() const;
  void Stop();
  // Blocks until Stop() is called from another thread or a signal.
  void Wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

}  // namespace evalign

#endif  // EVALIGN_MODELIO_H_
