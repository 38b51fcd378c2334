#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "ensprompt/errors.hpp"
#include "ensprompt/llm/call_log.hpp"
#include "ensprompt/llm/embedder.hpp"
#include "ensprompt/llm/evaluator.hpp"
#include "ensprompt/llm/http_client.hpp"
#include "ensprompt/llm/scripted_client.hpp"
#include "fixtures.hpp"

using namespace ensprompt;
using nlohmann::json;

namespace {

ChatRequest request(std::string user, std::optional<std::string> system = std::nullopt) {
  ChatRequest r;
  r.system_text = std::move(system);
  r.user_text = std::move(user);
  return r;
}

// In-process HTTP endpoint on an ephemeral port.
class LocalServer {
 public:
  // Handlers must be registered before the listener thread starts.
  explicit LocalServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  HttpSettings settings() const {
    HttpSettings s;
    s.base_url = "http://127.0.0.1:" + std::to_string(port_);
    s.model = "m";
    s.backoff_initial = std::chrono::milliseconds(1);
    s.backoff_max = std::chrono::milliseconds(4);
    s.timeout_seconds = 5.0;
    return s;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string chat_reply(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

std::map<std::string, int> trigrams(const std::string& text) {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) ++out[text.substr(i, 3)];
  return out;
}

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("scripted client echoes its script") {
  ScriptedClient client({"OK"});
  CHECK(client.complete(request("anything")) == "OK");
  CHECK_THROWS_AS(client.complete(request("again")), ScriptExhausted);
  ScriptedClient empty;
  CHECK_THROWS_AS(empty.complete(request("x")), ScriptExhausted);
}

TEST_CASE("scripted client resolution order") {
  auto client = ScriptedClient::from_json(json::parse(R"({
    "queue": ["q1", "q2"],
    "rules": [{"system_contains": "[skill]", "user_contains": ["case 1:"], "response": "rule"}],
    "default": "fallback"
  })"));
  const auto keyed = request("keyed question");
  client->add_keyed(request_fingerprint(keyed), "keyed answer");
  CHECK(client->complete(keyed) == "keyed answer");
  CHECK(client->complete(request("case 1: hi", "use [skill]")) == "rule");
  CHECK(client->complete(request("case 1: hi")) == "q1");
  CHECK(client->complete(request("other")) == "q2");
  CHECK(client->complete(request("other")) == "fallback");
  CHECK(client->calls() == 5);
  CHECK_THROWS_AS(ScriptedClient::from_json(json::parse(R"({"rules": [{}]})")), LoadError);
}

TEST_CASE("scripted client is deterministic and resumable") {
  ScriptedClient a({"1", "2", "3"}), b({"1", "2", "3"});
  for (int i = 0; i < 3; ++i) CHECK(a.complete(request("x")) == b.complete(request("x")));
  ScriptedClient c({"1", "2", "3"});
  c.complete(request("x"));
  const json saved = c.save_state();
  ScriptedClient d({"1", "2", "3"});
  d.restore_state(saved);
  CHECK(d.complete(request("x")) == "2");
}

TEST_CASE("request validation and fingerprint") {
  CHECK_THROWS_AS(validate(request("")), ContractViolation);
  auto r = request("q");
  r.temperature = -1;
  CHECK_THROWS_AS(validate(r), ContractViolation);
  r.temperature = 0;
  r.max_output = 0;
  CHECK_THROWS_AS(validate(r), ContractViolation);
  CHECK(request_fingerprint("s", "u") == request_fingerprint("s", "u"));
  CHECK(request_fingerprint("s", "u") != request_fingerprint("su", ""));
  CHECK(request_fingerprint("s", "u").size() == 16);
}

TEST_CASE("http client retries 429 twice then succeeds") {
  std::atomic<int> hits{0};
  std::atomic<bool> saw_query{false};
  LocalServer local([&](httplib::Server& server) { server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    saw_query = body["messages"].back()["content"] == "hello";
    if (++hits <= 2) {
      res.status = 429;
      return;
    }
    res.set_content(chat_reply("fine"), "application/json");
  }); });
  HttpChatClient client(local.settings());
  CHECK(client.complete(request("hello", "sys")) == "fine");
  CHECK(client.last_attempts() == 3);
  CHECK(hits == 3);
  CHECK(saw_query);
}

TEST_CASE("http client gives up after the retry cap") {
  std::atomic<int> hits{0};
  std::atomic<bool> saw_query{false};
  LocalServer local([&](httplib::Server& server) { server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  }); });
  auto settings = local.settings();
  settings.max_retries = 3;
  HttpChatClient client(settings);
  CHECK_THROWS_AS(client.complete(request("hello")), TransportError);
  CHECK(hits == 4);
}

TEST_CASE("http client does not retry other 4xx") {
  std::atomic<int> hits{0};
  std::atomic<bool> saw_query{false};
  LocalServer local([&](httplib::Server& server) { server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
  }); });
  HttpChatClient client(local.settings());
  CHECK_THROWS_AS(client.complete(request("hello")), TransportError);
  CHECK(hits == 1);
}

TEST_CASE("http client surfaces unreachable endpoints as transport errors") {
  HttpSettings settings;
  settings.base_url = "http://127.0.0.1:1";
  settings.max_retries = 1;
  settings.backoff_initial = std::chrono::milliseconds(1);
  settings.timeout_seconds = 1.0;
  HttpChatClient client(settings);
  CHECK_THROWS_AS(client.complete(request("hello")), TransportError);
}

TEST_CASE("http embedder normalizes and fixes the dimension") {
  std::atomic<int> hits{0};
  std::atomic<bool> saw_query{false};
  LocalServer local([&](httplib::Server& server) { server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    const json vec = ++hits == 1 ? json{3.0, 4.0} : json{1.0, 2.0, 3.0};
    res.set_content(json{{"data", {{{"embedding", vec}}}}}.dump(), "application/json");
  }); });
  HttpEmbedder embedder(local.settings());
  const auto v = embedder.embed("text");
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  CHECK(embedder.dimension() == 2);
  CHECK_THROWS_AS(embedder.embed("other"), ContractViolation);
}

TEST_CASE("hashing embedder") {
  HashingEmbedder embedder;
  CHECK(embedder.dimension() == 256);
  const std::string a = "Classify the sentiment of the review.";
  const std::string b = "Classify the polarity of the review.";
  const auto ea = embedder.embed(a);
  CHECK(ea == embedder.embed(a));
  double norm = 0.0;
  for (double x : ea) norm += x * x;
  CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-9);
  // Oracle: the trigram multisets differ, so the count vectors cannot be parallel
  // unless hashing folds the difference away.
  CHECK(trigrams(a) != trigrams(b));
  const auto eb = embedder.embed(b);
  double cosine = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) cosine += ea[i] * eb[i];
  CHECK(cosine < 1.0 - 1e-6);
  CHECK(cosine > 0.5);
  CHECK(embedder.embed("ab").size() == 256);
  CHECK_THROWS_AS(embedder.embed(""), ContractViolation);
}

TEST_CASE("l2_normalize rejects degenerate vectors") {
  EmbeddingVector zero(4, 0.0);
  CHECK_THROWS_AS(l2_normalize(zero), NumericError);
  EmbeddingVector nan{1.0, std::nan("")};
  CHECK_THROWS_AS(l2_normalize(nan), NumericError);
}

TEST_CASE("task evaluator scores parsed outputs") {
  ScriptedClient client;
  client.add_rule({{"P"}, {"q1"}, R"([{"label":"yes"}])"});
  client.add_rule({{"P"}, {"q2"}, "garbage"});
  client.add_rule({{"P"}, {"q3"}, "NO"});
  const std::vector<Example> examples{{"1", "q1", "yes"}, {"2", "q2", "no"}, {"3", "q3", "no"}};
  TaskEvaluator evaluator(client, LabelSpace({"yes", "no"}), Metric::accuracy);
  const auto record = evaluator.evaluate({"p1", "P", Origin::seed, {}, {}}, examples);
  CHECK(record.prompt_id == "p1");
  CHECK(record.aggregate == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(record.per_example[1].parsed.has_value());
  CHECK(record.per_example[1].raw_output == "garbage");
  CHECK(record.failure_count() == 1);
  for (const auto& r : client.history()) {
    CHECK(r.temperature == 0.0);
    CHECK(r.system_text == std::optional<std::string>("P"));
  }
}

TEST_CASE("call log counts by role and phase") {
  fixtures::TempDir dir("calllog");
  CallLog log(dir / "calls.log.jsonl");
  ScriptedClient inner({"a", "b", "c"});
  LoggingClient logged(inner, log, "task");
  log.set_phase("search");
  logged.complete(request("1"));
  logged.complete(request("2"));
  log.set_phase("evaluate");
  logged.complete(request("3"));
  CHECK(log.count("task") == 3);
  CHECK(log.count("task", "search") == 2);
  CHECK(log.total() == 3);
  CallLog restored;
  restored.restore_counts(log.save_counts());
  CHECK(restored.count("task", "evaluate") == 1);
  const auto text = fixtures::read_file(dir / "calls.log.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

}
