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

#include "evalign/modelio.h"

#include <cctype>
#include <cmath>
#include <regex>
#include <thread>

#include "embedded_data.h"
#include "evalign/text.h"
#include "httplib.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

void GenerationParams::Validate() const {
  if (max_new_tokens < 1) {
    throw Error(ErrorKind::kInvalidArgument, "max_new_tokens must be >= 1");
  }
  if (decoding == Decoding::kSample) {
    if (!(temperature > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "sampling temperature must be > 0");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "top_p must be in (0, 1]");
    }
  }
}

// ---------------------------------------------------------------------------
// Wire encoding.

std::string EncodeRequest(const InterleavedPrompt& prompt,
                          const GenerationParams& params) {
  json segments = json::array();
  for (const auto& seg : prompt.segments) {
    if (seg.is_image()) {
      segments.push_back({{"type", "image"}, {"value", seg.image().uri}});
    } else {
      segments.push_back({{"type", "text"}, {"value", seg.text()}});
    }
  }
  json p = {
      {"max_new_tokens", params.max_new_tokens},
      {"decoding", params.decoding == GenerationParams::Decoding::kGreedy ? "greedy" : "sample"},
      {"temperature", params.temperature},
      {"top_p", params.top_p},
      {"stop", params.stop_sequences},
  };
  if (params.seed) p["seed"] = *params.seed;
  return json{{"segments", segments}, {"params", p}}.dump();
}

WireRequest DecodeRequest(std::string_view body) {
  WireRequest out;
  try {
    const json doc = json::parse(body);
    for (const auto& seg : doc.at("segments")) {
      const std::string type = seg.at("type").get<std::string>();
      const std::string value = seg.at("value").get<std::string>();
      if (type == "image") {
        out.prompt.segments.push_back(Segment::Image({value, value}));
      } else if (type == "text") {
        out.prompt.segments.push_back(Segment::Text(value));
      } else {
        throw Error(ErrorKind::kProtocol, "unknown segment type '" + type + "'");
      }
    }
    if (auto it = doc.find("params"); it != doc.end()) {
      const json& p = *it;
      out.params.max_new_tokens = p.value("max_new_tokens", out.params.max_new_tokens);
      out.params.decoding = p.value("decoding", std::string("greedy")) == "sample"
                                ? GenerationParams::Decoding::kSample
                                : GenerationParams::Decoding::kGreedy;
      out.params.temperature = p.value("temperature", out.params.temperature);
      out.params.top_p = p.value("top_p", out.params.top_p);
      out.params.stop_sequences =
          p.value("stop", std::vector<std::string>{});
      if (p.contains("seed") && !p["seed"].is_null()) {
        out.params.seed = p["seed"].get<std::uint64_t>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kProtocol, std::string("bad request body: ") + e.what());
  }
  return out;
}

std::string EncodeResponse(const WireResponse& response) {
  return json{{"text", response.text},
              {"usage",
               {{"prompt_tokens", response.usage.prompt_tokens},
                {"completion_tokens", response.usage.completion_tokens}}}}
      .dump();
}

WireResponse DecodeResponse(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kProtocol, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kProtocol, "response is not an object");
  if (auto err = doc.find("error"); err != doc.end()) {
    const std::string type = err->is_object() ? err->value("type", "") : "";
    if (type == "capacity") {
      throw Error(ErrorKind::kCapacity, "endpoint reported a capacity error");
    }
    throw Error(ErrorKind::kProtocol, "endpoint error: " + err->dump());
  }
  auto text = doc.find("text");
  if (text == doc.end() || !text->is_string()) {
    throw Error(ErrorKind::kProtocol, "response has no string field 'text'");
  }
  WireResponse out;
  out.text = text->get<std::string>();
  if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
    out.usage.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
    out.usage.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// HTTP transport.

namespace {

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(EndpointConfig config) : config_(std::move(config)) {}

  TransportReply Send(std::string_view request_body) override {
    // One client per call; httplib clients are not safe to share across threads.
    httplib::Client client(config_.url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!config_.bearer_token.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.bearer_token);
    }
    auto res = client.Post(config_.path, headers, std::string(request_body),
                           "application/json");
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
  }

  std::string id() const override { return config_.url; }

 private:
  EndpointConfig config_;
};

}  // namespace

std::shared_ptr<Transport> MakeHttpTransport(const EndpointConfig& config) {
  if (config.url.empty()) throw Error(ErrorKind::kConfig, "endpoint url is empty");
  return std::make_shared<HttpTransport>(config);
}

// ---------------------------------------------------------------------------
// Client.

Client::Client(std::shared_ptr<Transport> transport, ClientOptions options)
    : transport_(std::move(transport)), options_(options) {
  if (!transport_) throw Error(ErrorKind::kInvalidArgument, "client needs a transport");
  if (options_.max_inflight == 0) {
    throw Error(ErrorKind::kInvalidArgument, "max_inflight must be >= 1");
  }
  if (options_.retry_budget < 0) {
    throw Error(ErrorKind::kInvalidArgument, "retry budget must be >= 0");
  }
}

GenerationExchange Client::Generate(const InterleavedPrompt& prompt,
                                    const GenerationParams& params) {
  params.Validate();
  const std::string body = EncodeRequest(prompt, params);

  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < options_.max_inflight; });
    ++in_flight_;
    if (in_flight_ > peak_in_flight_.load()) peak_in_flight_.store(in_flight_);
  }
  struct Release {
    Client* self;
    ~Release() {
      {
        std::lock_guard<std::mutex> lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const auto start = std::chrono::steady_clock::now();
  std::string last_failure;
  for (int attempt = 0; attempt <= options_.retry_budget; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(options_.backoff * (1 << std::min(attempt - 1, 10)));
    }
    const TransportReply reply = transport_->Send(body);
    if (reply.status == 200) {
      GenerationExchange ex;
      ex.prompt = prompt;
      ex.params = params;
      ex.output = DecodeResponse(reply.body).text;
      ex.latency = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now() - start);
      ex.endpoint_id = transport_->id();
      ex.attempts = attempt + 1;
      return ex;
    }
    if (reply.status == 413) {
      throw Error(ErrorKind::kCapacity,
                  "endpoint rejected a prompt with " + std::to_string(prompt.ImageCount()) +
                      " images");
    }
    const bool transient = reply.status == 0 || reply.status == 429 || reply.status >= 500;
    if (!transient) {
      try {
        DecodeResponse(reply.body);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kCapacity) {
          throw Error(ErrorKind::kCapacity,
                      "endpoint rejected a prompt with " +
                          std::to_string(prompt.ImageCount()) + " images");
        }
      }
      throw Error(ErrorKind::kProtocol,
                  "unexpected HTTP status " + std::to_string(reply.status));
    }
    last_failure = reply.status == 0 ? "connection failed (" + reply.body + ")"
                                     : "HTTP " + std::to_string(reply.status);
  }
  throw Error(ErrorKind::kEndpoint, transport_->id() + ": gave up after " +
                                        std::to_string(options_.retry_budget + 1) +
                                        " attempts, last: " + last_failure);
}

std::vector<ExchangeOutcome> Client::GenerateAll(std::span<const WireRequest> requests) {
  std::vector<ExchangeOutcome> outcomes(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        outcomes[i].exchange = Generate(requests[i].prompt, requests[i].params);
      } catch (const Error& e) {
        outcomes[i].error_kind = e.kind();
        outcomes[i].error_message = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min(options_.max_inflight, requests.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  if (n_workers > 0) worker();
  for (auto& t : threads) t.join();
  return outcomes;
}

// ---------------------------------------------------------------------------
// Judge.

std::string_view DefaultJudgeTemplate() { return embedded::judge_prompt_txt(); }

std::string RenderJudgePrompt(std::string_view judge_template,
                              std::string_view instruction,
                              std::string_view ground_truth,
                              std::string_view response) {
  std::string out;
  std::size_t pos = 0;
  while (pos < judge_template.size()) {
    const std::size_t open = judge_template.find('{', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = judge_template.find('}', open);
    if (close == std::string_view::npos) break;
    const std::string_view key = judge_template.substr(open + 1, close - open - 1);
    std::string_view value;
    if (key == "instruction") {
      value = instruction;
    } else if (key == "ground_truth") {
      value = ground_truth;
    } else if (key == "response") {
      value = response;
    } else {
      // Not ours; keep literally.
      out.append(judge_template.substr(pos, close + 1 - pos));
      pos = close + 1;
      continue;
    }
    out.append(judge_template.substr(pos, open - pos));
    out.append(value);
    pos = close + 1;
  }
  out.append(judge_template.substr(pos));
  return out;
}

JudgeVerdict ParseJudgeReply(std::string_view reply) {
  static const std::regex kScore(R"(score\s*[:=]\s*(-?\d+(?:\.\d+)?))", std::regex::icase);
  static const std::regex kNumber(R"(-?\d+(?:\.\d+)?)");
  const std::string text(Trim(reply));
  JudgeVerdict v;

  std::smatch m;
  if (std::regex_search(text, m, kScore)) {
    v.score = std::stod(m[1].str());
    v.rationale = std::string(Trim(std::string_view(text).substr(
        static_cast<std::size_t>(m.position(0) + m.length(0)))));
  } else {
    const std::size_t eol = text.find('\n');
    const std::string first = text.substr(0, eol);
    std::vector<double> numbers;
    for (auto it = std::sregex_iterator(first.begin(), first.end(), kNumber);
         it != std::sregex_iterator(); ++it) {
      numbers.push_back(std::stod(it->str()));
    }
    if (numbers.empty()) {
      throw Error(ErrorKind::kJudgeProtocol, "no score in judge reply: '" +
                                                 first.substr(0, 80) + "'");
    }
    if (numbers.size() >= 2) {
      v.reference_score = numbers[0];
      v.score = numbers[1];
    } else {
      v.score = numbers[0];
    }
    v.rationale = eol == std::string::npos ? "" : std::string(Trim(text.substr(eol + 1)));
  }
  auto in_range = [](double s) { return s >= 0.0 && s <= 10.0; };
  if (!in_range(v.score) || (v.reference_score && !in_range(*v.reference_score))) {
    throw Error(ErrorKind::kJudgeProtocol, "judge score out of range [0, 10]");
  }
  return v;
}

Judge::Judge(std::shared_ptr<Client> client, std::string judge_template,
             GenerationParams params)
    : client_(std::move(client)), template_(std::move(judge_template)), params_(params) {
  if (!client_) throw Error(ErrorKind::kInvalidArgument, "judge needs a client");
}

WireRequest Judge::Request(std::string_view response, std::string_view ground_truth,
                           std::string_view instruction) const {
  WireRequest req;
  req.prompt.segments.push_back(
      Segment::Text(RenderJudgePrompt(template_, instruction, ground_truth, response)));
  req.params = params_;
  return req;
}

JudgeVerdict Judge::Score(std::string_view response, std::string_view ground_truth,
                          std::string_view instruction) {
  const WireRequest req = Request(response, ground_truth, instruction);
  return ParseJudgeReply(client_->Generate(req.prompt, req.params).output);
}

}  // namespace evalign
