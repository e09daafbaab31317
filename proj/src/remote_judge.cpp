#include "elodec/remote_judge.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "elodec/errors.hpp"

namespace elodec {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kFunctionName = "choose_preference";

Json function_declaration() {
  Json preference;
  preference["type"] = "number";
  preference["description"] = "The index of the preferred answer in all given answers.";
  Json fn;
  fn["name"] = kFunctionName;
  fn["description"] = "Choose the preferred answer for the query within all given answers.";
  fn["parameters"]["type"] = "object";
  fn["parameters"]["properties"]["preference"] = preference;
  return fn;
}

class HttpTransport final : public ChatTransport {
 public:
  HttpTransport(const std::string& base_url, std::chrono::milliseconds timeout)
      : client_(base_url) {
    if (!client_.is_valid()) throw std::invalid_argument("unusable judge endpoint " + base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client_.set_connection_timeout(secs.count(), micros.count());
    client_.set_read_timeout(secs.count(), micros.count());
    client_.set_write_timeout(secs.count(), micros.count());
  }

  Response post(const std::string& path, const std::string& body,
                const std::map<std::string, std::string>& headers) override {
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    std::lock_guard lock(mu_);
    auto result = client_.Post(path, h, body, "application/json");
    if (!result) throw JudgeError("judge transport failed: " + httplib::to_string(result.error()));
    return {result->status, result->body};
  }

 private:
  std::mutex mu_;
  httplib::Client client_;
};

}  // namespace

void RemoteJudgeConfig::validate() const {
  if (base_url.empty()) throw std::invalid_argument("judge base_url is empty");
  if (model.empty()) throw std::invalid_argument("judge model is empty");
  if (index_base != 0 && index_base != 1) throw std::invalid_argument("judge index_base must be 0 or 1");
  if (timeout_ms == 0) throw std::invalid_argument("judge timeout_ms must be positive");
  if (max_in_flight == 0) throw std::invalid_argument("judge max_in_flight must be positive");
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw std::invalid_argument("judge temperature must be a non-negative number");
  }
}

const std::string& judge_prompt_template() {
  static const std::string text =
      "You are value-GPT, an expert in defining which trail is better and closer to solving the "
      "task. Here is the task description:\n"
      "*******************************\n"
      "{{BEGIN_DESCRIPTION}}\n"
      "your_task: {task_description}\n"
      "your_query: {input_description}\n"
      "{{END_DESCRIPTION}}\n"
      "*******************************\n"
      "Here are two candidates A and B. They both try to handle the task with some function "
      "calls. Their trails are as follows.\n"
      "*******************************\n"
      "{{CANDIDATE_A_START}}\n"
      "{candidate_A}\n"
      "{{CANDIDATE_A_END}}\n"
      "*******************************\n"
      "{{CANDIDATE_B_START}}\n"
      "{candidate_B}\n"
      "{{CANDIDATE_B_END}}\n"
      "*******************************";
  return text;
}

std::string assemble_judge_prompt(const TaskContext& context, const std::string& candidate_a,
                                  const std::string& candidate_b) {
  const std::map<std::string, const std::string*, std::less<>> values = {
      {"task_description", &context.task_description},
      {"input_description", &context.query},
      {"candidate_A", &candidate_a},
      {"candidate_B", &candidate_b},
  };
  const std::string& tpl = judge_prompt_template();
  std::string out;
  out.reserve(tpl.size() + candidate_a.size() + candidate_b.size() + context.query.size() +
              context.task_description.size());
  for (std::size_t i = 0; i < tpl.size();) {
    if (tpl.compare(i, 2, "{{") == 0 || tpl.compare(i, 2, "}}") == 0) {
      out += tpl[i];
      i += 2;
    } else if (tpl[i] == '{') {
      const std::size_t close = tpl.find('}', i);
      const auto it = values.find(std::string_view(tpl).substr(i + 1, close - i - 1));
      if (close == std::string::npos || it == values.end()) {
        throw std::logic_error("judge prompt template has an unknown placeholder");
      }
      out += *it->second;
      i = close + 1;
    } else {
      out += tpl[i++];
    }
  }
  return out;
}

std::string build_judge_request(const RemoteJudgeConfig& config, const std::string& prompt) {
  Json body;
  body["model"] = config.model;
  body["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = config.temperature;
  if (config.legacy_functions) {
    body["functions"] = Json::array({function_declaration()});
    body["function_call"] = Json{{"name", kFunctionName}};
  } else {
    body["tools"] = Json::array({Json{{"type", "function"}, {"function", function_declaration()}}});
    body["tool_choice"] = Json{{"type", "function"}, {"function", Json{{"name", kFunctionName}}}};
  }
  return body.dump();
}

Winner parse_judge_reply(const std::string& body, int index_base) {
  const Json reply = Json::parse(body, nullptr, false);
  if (reply.is_discarded()) throw JudgeError("judge reply is not JSON");
  const Json* call = nullptr;
  try {
    const Json& message = reply.at("choices").at(0).at("message");
    if (message.contains("tool_calls") && message["tool_calls"].is_array()) {
      for (const Json& tc : message["tool_calls"]) {
        if (tc.contains("function") && tc["function"].value("name", "") == kFunctionName) {
          call = &tc["function"];
          break;
        }
      }
    }
    if (call == nullptr && message.contains("function_call") && message["function_call"].is_object() &&
        message["function_call"].value("name", "") == kFunctionName) {
      call = &message["function_call"];
    }
  } catch (const nlohmann::json::exception&) {
    throw JudgeError("judge reply has no message");
  }
  if (call == nullptr) throw JudgeError("judge reply did not call choose_preference");

  Json args;
  if (call->contains("arguments") && (*call)["arguments"].is_string()) {
    args = Json::parse((*call)["arguments"].get<std::string>(), nullptr, false);
  } else if (call->contains("arguments")) {
    args = (*call)["arguments"];
  }
  if (args.is_discarded() || !args.is_object()) {
    throw JudgeError("choose_preference arguments are not a JSON object");
  }
  const auto it = args.find("preference");
  if (it == args.end() || !it->is_number()) return Winner::kAbstain;
  const double pref = it->get<double>();
  if (pref == index_base) return Winner::kFirst;
  if (pref == index_base + 1) return Winner::kSecond;
  return Winner::kAbstain;
}

std::unique_ptr<ChatTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::milliseconds timeout) {
  return std::make_unique<HttpTransport>(base_url, timeout);
}

RequestGate::RequestGate(std::uint32_t max_in_flight, std::chrono::milliseconds min_interval)
    : max_in_flight_(max_in_flight), min_interval_(min_interval) {
  if (max_in_flight == 0) throw std::invalid_argument("max_in_flight must be positive");
}

void RequestGate::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
  ++in_flight_;
  const auto now = std::chrono::steady_clock::now();
  const auto start = std::max(now, next_start_);
  next_start_ = start + min_interval_;
  lock.unlock();
  std::this_thread::sleep_until(start);
}

void RequestGate::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::shared_ptr<RequestGate> RequestGate::process_wide(std::uint32_t max_in_flight,
                                                       std::chrono::milliseconds min_interval) {
  static std::mutex mu;
  static std::shared_ptr<RequestGate> gate;
  std::lock_guard lock(mu);
  if (!gate) gate = std::make_shared<RequestGate>(max_in_flight, min_interval);
  return gate;
}

RemoteJudge::RemoteJudge(RemoteJudgeConfig config, std::shared_ptr<ChatTransport> transport,
                         std::shared_ptr<RequestGate> gate)
    : config_(std::move(config)), transport_(std::move(transport)), gate_(std::move(gate)) {
  config_.validate();
  if (!transport_) throw std::invalid_argument("remote judge needs a transport");
  if (!gate_) {
    gate_ = RequestGate::process_wide(config_.max_in_flight,
                                      std::chrono::milliseconds(config_.min_interval_ms));
  }
}

JudgeVerdict RemoteJudge::compare(const TaskContext& context, const Candidate& first,
                                  const Candidate& second, Rng& /*rng*/) {
  if (first.rendering.empty() || second.rendering.empty()) {
    throw std::invalid_argument("remote judge needs two non-empty renderings");
  }
  std::map<std::string, std::string> headers;
  if (!config_.api_key_env.empty()) {
    const char* token = std::getenv(config_.api_key_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw JudgeError("environment variable " + config_.api_key_env + " is not set");
    }
    headers["Authorization"] = std::string("Bearer ") + token;
  }
  const std::string body =
      build_judge_request(config_, assemble_judge_prompt(context, first.rendering, second.rendering));

  const auto started = std::chrono::steady_clock::now();
  std::string last_error;
  std::chrono::milliseconds backoff(config_.backoff_ms);
  for (std::uint32_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    ChatTransport::Response response;
    gate_->acquire();
    try {
      {
        std::lock_guard lock(stats_mu_);
        ++requests_sent_;
      }
      response = transport_->post(config_.path, body, headers);
    } catch (const JudgeError& e) {
      gate_->release();
      last_error = e.what();
      continue;
    }
    gate_->release();
    if (response.status < 200 || response.status >= 300) {
      last_error = "judge endpoint returned HTTP " + std::to_string(response.status);
      continue;
    }
    JudgeVerdict verdict;
    verdict.winner = parse_judge_reply(response.body, config_.index_base);
    verdict.latency = std::chrono::steady_clock::now() - started;
    verdict.raw = response.body;
    return verdict;
  }
  throw JudgeError(last_error + " (after " + std::to_string(config_.max_retries + 1) + " attempts)");
}

std::uint64_t RemoteJudge::requests_sent() const {
  std::lock_guard lock(stats_mu_);
  return requests_sent_;
}

}  // namespace elodec
