#pragma once

// Judge backed by an OpenAI-compatible chat-completions endpoint. The model
// is asked to call a single function, choose_preference, whose numeric
// `preference` argument is the index of the better candidate.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "elodec/judges.hpp"

namespace elodec {

struct RemoteJudgeConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  // Name of the environment variable holding the bearer token; empty sends
  // no Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  std::uint32_t timeout_ms = 60000;
  std::uint32_t max_retries = 2;
  std::uint32_t backoff_ms = 1000;  // doubled after every failed attempt
  int index_base = 0;               // 1 for endpoints counting answers from 1
  double temperature = 0.0;
  // Declare the function through the older "functions" field instead of "tools".
  bool legacy_functions = false;
  std::uint32_t max_in_flight = 4;
  std::uint32_t min_interval_ms = 0;

  void validate() const;
};

// Placeholders: {task_description}, {input_description}, {candidate_A},
// {candidate_B}; doubled braces are literal braces.
const std::string& judge_prompt_template();

// Substitutes the context and both renderings into the template in one pass,
// so braces inside substituted text are never re-interpreted.
std::string assemble_judge_prompt(const TaskContext& context, const std::string& candidate_a,
                                  const std::string& candidate_b);

std::string build_judge_request(const RemoteJudgeConfig& config, const std::string& prompt);

// Reads the choose_preference call out of a chat-completions reply. Throws
// JudgeError when the reply is not JSON or carries no such call. A preference
// other than the two valid indices yields kAbstain.
Winner parse_judge_reply(const std::string& body, int index_base);

class ChatTransport {
 public:
  struct Response {
    int status = 0;
    std::string body;
  };
  virtual ~ChatTransport() = default;
  // Throws JudgeError when no HTTP response was obtained.
  virtual Response post(const std::string& path, const std::string& body,
                        const std::map<std::string, std::string>& headers) = 0;
};

// cpp-httplib client. https:// URLs need the library built with OpenSSL.
std::unique_ptr<ChatTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::milliseconds timeout);

// Bounds concurrent requests and spaces request starts.
class RequestGate {
 public:
  RequestGate(std::uint32_t max_in_flight, std::chrono::milliseconds min_interval);

  // Blocks until a slot is free; release() must follow.
  void acquire();
  void release();

  // One gate per process, created from the first caller's settings.
  static std::shared_ptr<RequestGate> process_wide(std::uint32_t max_in_flight,
                                                   std::chrono::milliseconds min_interval);

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint32_t max_in_flight_;
  std::uint32_t in_flight_ = 0;
  std::chrono::milliseconds min_interval_;
  std::chrono::steady_clock::time_point next_start_{};
};

class RemoteJudge final : public Judge {
 public:
  RemoteJudge(RemoteJudgeConfig config, std::shared_ptr<ChatTransport> transport,
              std::shared_ptr<RequestGate> gate = nullptr);

  // Never touches engine state: the verdict (with the raw reply) is the only
  // effect.
  JudgeVerdict compare(const TaskContext& context, const Candidate& first,
                       const Candidate& second, Rng& rng) override;

  std::uint64_t requests_sent() const;

 private:
  RemoteJudgeConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  std::shared_ptr<RequestGate> gate_;
  mutable std::mutex stats_mu_;
  std::uint64_t requests_sent_ = 0;
};

}  // namespace elodec
