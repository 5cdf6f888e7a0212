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

// Command-line front end: run experiments, re-emit reports, convert COCO
// annotations, generate chain-of-hindsight negatives and serve a scripted
// mock endpoint.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evalign/corpus.h"
#include "evalign/error.h"
#include "evalign/modelio.h"
#include "evalign/report.h"
#include "evalign/runner.h"

namespace {

using evalign::Error;
using evalign::ErrorKind;

struct EndpointFlags {
  std::string mock_script;
  std::string judge_mock_script;
  std::string endpoint;
  std::string judge_endpoint;
  std::size_t max_inflight = 0;
  int retry_budget = -1;
};

void AddEndpointFlags(CLI::App* cmd, EndpointFlags& f) {
  cmd->add_option("--mock-script", f.mock_script, "Serve generations from a mock script in-process");
  cmd->add_option("--judge-mock-script", f.judge_mock_script, "Mock script for the judge");
  cmd->add_option("--endpoint", f.endpoint, "Generation endpoint URL (env EVALIGN_ENDPOINT)");
  cmd->add_option("--judge-endpoint", f.judge_endpoint, "Judge endpoint URL (env EVALIGN_JUDGE_ENDPOINT)");
  cmd->add_option("--max-inflight", f.max_inflight, "Concurrent requests per endpoint");
  cmd->add_option("--retry-budget", f.retry_budget, "Retries per request on transient failures");
}

std::string Env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

// Precedence: mock script, command-line URL, environment, config file.
std::shared_ptr<evalign::Client> MakeClient(
    const std::string& mock_script, const std::string& flag_url, const char* env_name,
    const std::optional<evalign::EndpointSettings>& from_config, const EndpointFlags& f,
    const std::string& mock_id) {
  evalign::ClientOptions options;
  evalign::EndpointSettings settings = from_config.value_or(evalign::EndpointSettings{});
  options.max_inflight = settings.max_inflight;
  options.retry_budget = settings.retry_budget;
  if (f.max_inflight > 0) options.max_inflight = f.max_inflight;
  if (f.retry_budget >= 0) options.retry_budget = f.retry_budget;

  if (!mock_script.empty()) {
    auto transport = std::make_shared<evalign::ScriptedTransport>(
        evalign::MockScript::Load(mock_script), mock_id);
    return std::make_shared<evalign::Client>(transport, options);
  }
  std::string url = flag_url;
  if (url.empty()) url = Env(env_name);
  if (url.empty()) url = settings.url;
  if (url.empty()) return nullptr;
  evalign::EndpointConfig ec;
  ec.url = url;
  ec.timeout = std::chrono::milliseconds(settings.timeout_ms);
  ec.bearer_token = Env("EVALIGN_API_KEY");
  return std::make_shared<evalign::Client>(evalign::MakeHttpTransport(ec), options);
}

std::vector<std::string> Split(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int EmitAndReport(const evalign::MetricReport& report, const std::string& out_dir,
                  const std::string& formats) {
  for (const auto& n : report.notices) std::cerr << "note: " << n << "\n";
  if (report.cells.empty()) {
    std::cerr << "no cells were produced; nothing to emit\n";
    return 0;
  }
  for (const auto& path : evalign::Emit(report, out_dir, evalign::EmitFormats::Parse(formats))) {
    std::cout << path << "\n";
  }
  for (const auto& [key, cell] : report.cells) {
    if (!cell.valid) {
      std::cerr << "warning: cell " << key.axis << "/" << key.variant << "/" << key.shots
                << " is invalid";
      if (!cell.errors.empty()) std::cerr << ": " << cell.errors.front();
      std::cerr << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evalign: few-shot alignment evaluation for multimodal model endpoints"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path, axis, variants, shots, seeds, out_dir = "evalign_out",
                                                          formats = "structured,tabular,plot",
                                                          log_path;
  std::size_t n_queries = 0;
  EndpointFlags run_flags;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--axis", axis, "Override the axis");
  run->add_option("--variant", variants, "Comma-separated variants");
  run->add_option("--shots", shots, "Comma-separated shot counts");
  run->add_option("--seeds", seeds, "Comma-separated seeds");
  run->add_option("--n-queries", n_queries, "Override the number of queries");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--formats", formats, "structured,tabular,plot");
  run->add_option("--log", log_path, "Run log path (default <out>/runlog.jsonl)");
  AddEndpointFlags(run, run_flags);

  // report
  auto* report_cmd = app.add_subcommand("report", "Re-emit a report from report.json or a run log");
  std::string from, report_out = "evalign_out", report_formats = "structured,tabular,plot";
  report_cmd->add_option("--from", from, "report.json or run log")->required();
  report_cmd->add_option("--out", report_out, "Output directory");
  report_cmd->add_option("--formats", report_formats, "structured,tabular,plot");

  // convert-coco
  auto* convert = app.add_subcommand("convert-coco", "Convert COCO annotations to caption records");
  std::string captions_path, instances_path, vocab_path, exceptions_path, convert_out;
  convert->add_option("--captions", captions_path, "captions_*.json")->required();
  convert->add_option("--instances", instances_path, "instances_*.json");
  convert->add_option("--vocab", vocab_path, "Synonym table (default: bundled COCO-80)");
  convert->add_option("--exceptions", exceptions_path, "Singularization exceptions");
  convert->add_option("--out", convert_out, "Output JSONL")->required();

  // serve-mock
  auto* serve = app.add_subcommand("serve-mock", "Serve a mock script over HTTP");
  std::string script_path, host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--script", script_path, "Mock script (JSON)")->required();
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--host", host, "Bind address");

  // negatives
  auto* negatives = app.add_subcommand("negatives", "Generate chain-of-hindsight negatives with ICL");
  std::string neg_config, neg_out;
  EndpointFlags neg_flags;
  negatives->add_option("--config", neg_config, "Explainability config")->required();
  negatives->add_option("--out", neg_out, "Output JSONL")->required();
  AddEndpointFlags(negatives, neg_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      evalign::ExperimentConfig config = evalign::LoadConfig(config_path);
      if (!axis.empty()) {
        auto a = evalign::ParseAxis(axis);
        if (!a) throw Error(ErrorKind::kConfig, "unknown axis '" + axis + "'");
        config.axis = *a;
      }
      if (!variants.empty()) {
        config.variants.clear();
        for (const auto& v : Split(variants)) {
          auto parsed = evalign::ParseVariant(v);
          if (!parsed) throw Error(ErrorKind::kConfig, "unknown variant '" + v + "'");
          config.variants.push_back(*parsed);
        }
      }
      if (!shots.empty()) {
        config.shots.clear();
        for (const auto& s : Split(shots)) config.shots.push_back(std::stoi(s));
      }
      if (!seeds.empty()) {
        config.seeds.clear();
        for (const auto& s : Split(seeds)) config.seeds.push_back(std::stoull(s));
      }
      if (n_queries > 0) config.n_queries = n_queries;
      config.Validate();

      evalign::RunLog log;
      evalign::RunContext ctx;
      ctx.client = MakeClient(run_flags.mock_script, run_flags.endpoint, "EVALIGN_ENDPOINT",
                              config.endpoint, run_flags, "mock");
      if (!ctx.client) {
        throw Error(ErrorKind::kConfig,
                    "no endpoint: pass --endpoint, --mock-script or set EVALIGN_ENDPOINT");
      }
      auto judge_client =
          MakeClient(run_flags.judge_mock_script, run_flags.judge_endpoint,
                     "EVALIGN_JUDGE_ENDPOINT", config.judge_endpoint, run_flags, "judge-mock");
      if (judge_client) {
        std::string tmpl(evalign::DefaultJudgeTemplate());
        if (!config.judge_template_path.empty()) {
          tmpl = evalign::ReadTextFile(config.judge_template_path);
        }
        ctx.judge = std::make_shared<evalign::Judge>(judge_client, tmpl);
      }
      ctx.log = &log;
      const evalign::MetricReport report = evalign::RunAxis(config, ctx);
      std::filesystem::create_directories(out_dir);
      log.WriteTo(log_path.empty() ? (std::filesystem::path(out_dir) / "runlog.jsonl").string()
                                   : log_path);
      return EmitAndReport(report, out_dir, formats);
    }
    if (*report_cmd) {
      return EmitAndReport(evalign::ReadReport(from), report_out, report_formats);
    }
    if (*convert) {
      const evalign::ObjectVocabulary vocab =
          vocab_path.empty() ? evalign::ObjectVocabulary::Coco80()
                             : evalign::ObjectVocabulary::Load(vocab_path, exceptions_path);
      const auto records = evalign::LoadCocoCaptions(captions_path, instances_path, vocab);
      evalign::WriteTextFile(convert_out, evalign::ToJsonl(std::span<const evalign::CaptionRecord>(records)));
      std::cout << records.size() << " records written to " << convert_out << "\n";
      return 0;
    }
    if (*serve) {
      evalign::MockServer server(evalign::MockScript::Load(script_path), port, host);
      std::cout << "serving " << script_path << " at " << server.url() << std::endl;
      server.Wait();
      return 0;
    }
    if (*negatives) {
      const evalign::ExperimentConfig config = evalign::LoadConfig(neg_config);
      evalign::RunContext ctx;
      ctx.client = MakeClient(neg_flags.mock_script, neg_flags.endpoint, "EVALIGN_ENDPOINT",
                              config.endpoint, neg_flags, "mock");
      if (!ctx.client) throw Error(ErrorKind::kConfig, "no endpoint configured");
      evalign::GenerateNegatives(config, ctx, neg_out);
      std::cout << "negatives written to " << neg_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "evalign: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "evalign: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
