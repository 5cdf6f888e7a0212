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

#include <atomic>
#include <cctype>
#include <csignal>
#include <thread>

#include "evalign/modelio.h"
#include "evalign/text.h"
#include "httplib.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

namespace {

std::string ErrorBody(std::string_view type, std::string_view message) {
  return json{{"error", {{"type", type}, {"message", message}}}}.dump();
}

std::size_t WordCount(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

}  // namespace

MockScript::MockScript(MockScript&& other) noexcept
    : image_marker_(std::move(other.image_marker_)),
      rules_(std::move(other.rules_)),
      default_reply_(std::move(other.default_reply_)),
      mu_(std::move(other.mu_)),
      fail_counts_(std::move(other.fail_counts_)),
      requests_seen_(other.requests_seen_.load()) {
  other.mu_ = std::make_unique<std::mutex>();
}

MockScript& MockScript::operator=(MockScript&& other) noexcept {
  image_marker_ = std::move(other.image_marker_);
  rules_ = std::move(other.rules_);
  default_reply_ = std::move(other.default_reply_);
  mu_ = std::move(other.mu_);
  other.mu_ = std::make_unique<std::mutex>();
  fail_counts_ = std::move(other.fail_counts_);
  requests_seen_ = other.requests_seen_.load();
  return *this;
}

MockScript MockScript::Parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kScript, std::string("mock script is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kScript, "mock script must be an object");

  MockScript script;
  try {
    script.image_marker_ = doc.value("image_marker", script.image_marker_);
    script.default_reply_ = doc.value("default", std::string());
    const json rules = doc.value("rules", json::array());
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const json& r = rules[i];
      const std::string where = "rules[" + std::to_string(i) + "]";
      Rule rule;
      const std::string type = r.at("type").get<std::string>();
      const std::string on = r.value("on", std::string("query"));
      if (on != "query" && on != "wire") {
        throw Error(ErrorKind::kScript, where + ": 'on' must be query or wire");
      }
      rule.on_wire = on == "wire";
      auto compile = [&](const std::string& key) {
        try {
          rule.pattern.emplace(r.at(key).get<std::string>());
        } catch (const std::regex_error& e) {
          throw Error(ErrorKind::kScript, where + ": bad regex: " + e.what());
        }
      };
      if (type == "echo") {
        rule.kind = Rule::Kind::kEcho;
      } else if (type == "fixed") {
        rule.kind = Rule::Kind::kFixed;
        rule.text_a = r.at("reply").get<std::string>();
      } else if (type == "contains") {
        rule.kind = Rule::Kind::kContains;
        rule.text_a = r.at("needle").get<std::string>();
        rule.text_b = r.at("reply").get<std::string>();
      } else if (type == "regex") {
        rule.kind = Rule::Kind::kRegex;
        compile("pattern");
        rule.text_a = r.at("reply").get<std::string>();
      } else if (type == "lookup") {
        rule.kind = Rule::Kind::kLookup;
        if (r.contains("key_pattern")) compile("key_pattern");
        for (const auto& [key, value] : r.at("table").items()) {
          rule.table.emplace_back(key, value.get<std::string>());
        }
      } else if (type == "regex_equal") {
        rule.kind = Rule::Kind::kRegexEqual;
        compile("pattern");
        if (rule.pattern->mark_count() < 2) {
          throw Error(ErrorKind::kScript, where + ": regex_equal needs two groups");
        }
        rule.text_a = r.at("if_equal").get<std::string>();
        rule.text_b = r.at("otherwise").get<std::string>();
      } else if (type == "fail") {
        rule.kind = Rule::Kind::kFail;
        rule.number = r.value("status", 503);
        rule.times = r.value("times", 1);
      } else if (type == "capacity") {
        rule.kind = Rule::Kind::kCapacity;
        rule.number = r.at("max_images").get<int>();
      } else if (type == "delay") {
        rule.kind = Rule::Kind::kDelay;
        rule.number = r.at("ms").get<int>();
      } else {
        throw Error(ErrorKind::kScript, where + ": unknown rule type '" + type + "'");
      }
      script.rules_.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kScript, std::string("mock script: ") + e.what());
  }
  script.fail_counts_.assign(script.rules_.size(), 0);
  return script;
}

MockScript MockScript::Load(const std::string& path) {
  return Parse(ReadTextFile(path));
}

TransportReply MockScript::Handle(std::string_view request_body) {
  ++requests_seen_;
  WireRequest req;
  try {
    req = DecodeRequest(request_body);
  } catch (const Error& e) {
    return {400, ErrorBody("protocol", e.what())};
  }
  std::string wire;
  for (const auto& seg : req.prompt.segments) {
    wire += seg.is_image() ? image_marker_ : seg.text();
  }
  const std::string query(req.prompt.QueryText());
  const std::size_t images = req.prompt.ImageCount();

  auto reply_with = [&](std::string text) -> TransportReply {
    WireResponse res;
    res.usage.prompt_tokens = static_cast<std::int64_t>(WordCount(wire));
    res.usage.completion_tokens = static_cast<std::int64_t>(WordCount(text));
    res.text = std::move(text);
    return {200, EncodeResponse(res)};
  };

  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& rule = rules_[i];
    const std::string& subject = rule.on_wire ? wire : query;
    std::smatch m;
    switch (rule.kind) {
      case Rule::Kind::kEcho:
        return reply_with(subject);
      case Rule::Kind::kFixed:
        return reply_with(rule.text_a);
      case Rule::Kind::kContains:
        if (subject.find(rule.text_a) != std::string::npos) return reply_with(rule.text_b);
        break;
      case Rule::Kind::kRegex:
        if (std::regex_search(subject, m, *rule.pattern)) {
          return reply_with(m.format(rule.text_a));
        }
        break;
      case Rule::Kind::kLookup: {
        std::string key = subject;
        if (rule.pattern) {
          if (!std::regex_search(subject, m, *rule.pattern)) break;
          key = m.size() > 1 ? m[1].str() : m[0].str();
        }
        for (const auto& [k, v] : rule.table) {
          if (k == key) return reply_with(v);
        }
        break;
      }
      case Rule::Kind::kRegexEqual:
        if (std::regex_search(subject, m, *rule.pattern)) {
          return reply_with(m[1].str() == m[2].str() ? rule.text_a : rule.text_b);
        }
        break;
      case Rule::Kind::kFail: {
        std::lock_guard<std::mutex> lock(*mu_);
        if (fail_counts_[i] < rule.times) {
          ++fail_counts_[i];
          return {rule.number, ErrorBody("transient", "scripted failure")};
        }
        break;
      }
      case Rule::Kind::kCapacity:
        if (images > static_cast<std::size_t>(rule.number)) {
          return {413, ErrorBody("capacity", std::to_string(images) + " images exceed " +
                                                 std::to_string(rule.number))};
        }
        break;
      case Rule::Kind::kDelay:
        std::this_thread::sleep_for(std::chrono::milliseconds(rule.number));
        break;
    }
  }
  return reply_with(default_reply_);
}

// ---------------------------------------------------------------------------

ScriptedTransport::ScriptedTransport(MockScript script, std::string id)
    : script_(std::move(script)), id_(std::move(id)) {}

TransportReply ScriptedTransport::Send(std::string_view request_body) {
  const std::size_t now = ++in_flight_;
  std::size_t peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  TransportReply reply = script_.Handle(request_body);
  --in_flight_;
  return reply;
}

// ---------------------------------------------------------------------------

namespace {
std::atomic<bool> g_stop_requested{false};
extern "C" void OnStopSignal(int) { g_stop_requested = true; }
}  // namespace

struct MockServer::Impl {
  MockScript script;
  httplib::Server server;
  std::thread thread;
  std::atomic<std::size_t> served{0};
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> peak{0};
};

MockServer::MockServer(MockScript script, int port, std::string host)
    : impl_(std::make_unique<Impl>()), host_(std::move(host)) {
  impl_->script = std::move(script);
  Impl* impl = impl_.get();
  impl->server.new_task_queue = [] { return new httplib::ThreadPool(16); };
  impl->server.Post("/v1/generate", [impl](const httplib::Request& req,
                                           httplib::Response& res) {
    const std::size_t now = ++impl->in_flight;
    std::size_t peak = impl->peak.load();
    while (now > peak && !impl->peak.compare_exchange_weak(peak, now)) {
    }
    const TransportReply reply = impl->script.Handle(req.body);
    --impl->in_flight;
    ++impl->served;
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
  impl->server.Get("/v1/stats", [impl](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"requests", impl->served.load()},
                         {"in_flight", impl->in_flight.load()},
                         {"peak_in_flight", impl->peak.load()}}
                        .dump(),
                    "application/json");
  });

  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // would let a second server silently share a port already in use.
  impl->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    port_ = impl->server.bind_to_any_port(host_);
    if (port_ <= 0) throw Error(ErrorKind::kPortBusy, "cannot bind an ephemeral port on " + host_);
  } else {
    if (!impl->server.bind_to_port(host_, port)) {
      throw Error(ErrorKind::kPortBusy, "port " + std::to_string(port) + " on " + host_ +
                                            " is unavailable");
    }
    port_ = port;
  }
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

MockServer::~MockServer() { Stop(); }

std::string MockServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

std::size_t MockServer::requests_served() const { return impl_->served.load(); }
std::size_t MockServer::peak_in_flight() const { return impl_->peak.load(); }

void MockServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockServer::Wait() {
  g_stop_requested = false;
  auto old_int = std::signal(SIGINT, OnStopSignal);
  auto old_term = std::signal(SIGTERM, OnStopSignal);
  while (!g_stop_requested && impl_->server.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  std::signal(SIGINT, old_int);
  std::signal(SIGTERM, old_term);
  Stop();
}

}  // namespace evalign
