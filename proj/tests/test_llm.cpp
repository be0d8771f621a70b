#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#include "glow/llm/chat.hpp"
#include "glow/llm/http_backend.hpp"
#include "test_support.hpp"

using namespace glow;

namespace {

ChatRequest request(std::string text, double temperature = 0.5) {
  return ChatRequest{{{Role::user, std::move(text)}}, temperature, Purpose::act};
}

// Throws `failures` transient errors, then echoes the prompt.
class Flaky final : public ChatBackend {
 public:
  explicit Flaky(int failures, bool permanent = false) : failures_(failures), permanent_(permanent) {}
  ChatResponse complete(const ChatRequest& r) override {
    ++calls;
    if (calls <= failures_) {
      if (permanent_) throw BackendError("HTTP 400");
      throw TransientBackendError("HTTP 503");
    }
    return {"echo:" + r.messages.back().content, {3, 4}, id(), false};
  }
  std::string id() const override { return "flaky"; }
  int calls = 0;

 private:
  int failures_;
  bool permanent_;
};

struct ScopedEnv {
  std::string name;
  ScopedEnv(std::string n, const char* value) : name(std::move(n)) {
    if (value) ::setenv(name.c_str(), value, 1);
    else ::unsetenv(name.c_str());
  }
  ~ScopedEnv() { ::unsetenv(name.c_str()); }
};

// A local chat-completions endpoint. `status` is served for the first
// `failures` requests.
struct FakeEndpoint {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::vector<std::string> auth_headers;
  std::vector<nlohmann::json> bodies;
  int status = 200;
  int failures = 0;
  std::mutex mu;

  FakeEndpoint() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu);
      auth_headers.push_back(req.get_header_value("Authorization"));
      bodies.push_back(nlohmann::json::parse(req.body));
      if (failures > 0) {
        --failures;
        res.status = status;
        res.set_content("{}", "application/json");
        return;
      }
      nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "{\"action\": \"look\"}"}}}}}},
                           {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 5}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeEndpoint() {
    server.stop();
    thread.join();
  }
  HttpBackendConfig config(const std::string& key_env) const {
    HttpBackendConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.model = "test-model";
    c.api_key_env = key_env;
    c.timeout = std::chrono::seconds(5);
    return c;
  }
};

}  // namespace

TEST(Retrying, RecoversFromTransientErrorsWithBackoff) {
  auto inner = std::make_shared<Flaky>(2);
  std::vector<long> delays;
  RetryingBackend r(inner, 3, std::chrono::milliseconds(100),
                    [&](std::chrono::milliseconds d) { delays.push_back(d.count()); });
  EXPECT_EQ(r.complete(request("hi")).text, "echo:hi");
  EXPECT_EQ(inner->calls, 3);
  EXPECT_EQ(delays, (std::vector<long>{100, 200}));
}

TEST(Retrying, GivesUpAfterMaxRetries) {
  auto inner = std::make_shared<Flaky>(10);
  RetryingBackend r(inner, 3, std::chrono::milliseconds(1), [](auto) {});
  EXPECT_THROW(r.complete(request("hi")), BackendError);
  EXPECT_EQ(inner->calls, 4);
}

TEST(Retrying, PermanentErrorsAreNotRetried) {
  auto inner = std::make_shared<Flaky>(1, true);
  RetryingBackend r(inner, 3, std::chrono::milliseconds(1), [](auto) {});
  EXPECT_THROW(r.complete(request("hi")), BackendError);
  EXPECT_EQ(inner->calls, 1);
}

TEST(Caching, KeyedByFullRequest) {
  auto inner = std::make_shared<Flaky>(0);
  CachingBackend c(inner);
  auto first = c.complete(request("a"));
  auto second = c.complete(request("a"));
  EXPECT_FALSE(first.from_cache);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.text, first.text);
  c.complete(request("a", 0.7));
  c.complete(request("b"));
  EXPECT_EQ(inner->calls, 3);
  EXPECT_EQ(c.hits(), 1u);
  EXPECT_EQ(c.misses(), 3u);
}

TEST(Caching, DirectoryPersistsAcrossInstances) {
  glow::testing::TempDir dir("glow_cache");
  auto inner = std::make_shared<Flaky>(0);
  {
    CachingBackend c(inner, dir.path);
    c.complete(request("persist me"));
  }
  CachingBackend again(inner, dir.path);
  auto r = again.complete(request("persist me"));
  EXPECT_TRUE(r.from_cache);
  EXPECT_EQ(r.text, "echo:persist me");
  EXPECT_EQ(inner->calls, 1);
}

TEST(RequestDigest, SensitiveToEveryField) {
  auto base = request("x");
  auto other_purpose = base;
  other_purpose.purpose = Purpose::reflect;
  auto other_role = base;
  other_role.messages[0].role = Role::system;
  EXPECT_EQ(request_digest(base), request_digest(request("x")));
  EXPECT_NE(request_digest(base), request_digest(request("x", 0.6)));
  EXPECT_NE(request_digest(base), request_digest(other_role));
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Http, SendsCredentialFromEnvironmentOnly) {
  ScopedEnv key("GLOW_TEST_API_KEY", "secret-123");
  FakeEndpoint ep;
  HttpBackend backend(ep.config("GLOW_TEST_API_KEY"));
  auto r = backend.complete(request("hello", 0.25));
  EXPECT_EQ(r.text, "{\"action\": \"look\"}");
  EXPECT_EQ(r.token_usage.prompt_tokens, 12);
  EXPECT_EQ(r.token_usage.completion_tokens, 5);
  ASSERT_EQ(ep.auth_headers.size(), 1u);
  EXPECT_EQ(ep.auth_headers[0], "Bearer secret-123");
  EXPECT_EQ(ep.bodies[0]["model"], "test-model");
  EXPECT_DOUBLE_EQ(ep.bodies[0]["temperature"].get<double>(), 0.25);
  EXPECT_EQ(ep.bodies[0]["messages"][0]["content"], "hello");
  EXPECT_EQ(backend.id(), "http:test-model");
}

TEST(Http, MissingCredentialIsAConfigError) {
  ScopedEnv key("GLOW_TEST_API_KEY_UNSET", nullptr);
  FakeEndpoint ep;
  EXPECT_THROW(HttpBackend(ep.config("GLOW_TEST_API_KEY_UNSET")), ConfigError);
}

TEST(Http, StatusMapping) {
  ScopedEnv key("GLOW_TEST_API_KEY", "k");
  FakeEndpoint ep;
  ep.status = 503;
  ep.failures = 1;
  HttpBackend backend(ep.config("GLOW_TEST_API_KEY"));
  EXPECT_THROW(backend.complete(request("x")), TransientBackendError);
  EXPECT_NO_THROW(backend.complete(request("x")));

  ep.status = 401;
  ep.failures = 1;
  EXPECT_THROW(backend.complete(request("x")), ConfigError);
  ep.status = 400;
  ep.failures = 1;
  try {
    backend.complete(request("x"));
    FAIL();
  } catch (const TransientBackendError&) {
    FAIL() << "400 must not be retried";
  } catch (const BackendError&) {
  }
}

TEST(Http, RetryingStackRecoversFrom429) {
  ScopedEnv key("GLOW_TEST_API_KEY", "k");
  FakeEndpoint ep;
  ep.status = 429;
  ep.failures = 2;
  RetryingBackend r(std::make_shared<HttpBackend>(ep.config("GLOW_TEST_API_KEY")), 3, std::chrono::milliseconds(1));
  EXPECT_EQ(r.complete(request("x")).text, "{\"action\": \"look\"}");
  EXPECT_EQ(ep.bodies.size(), 3u);
}

TEST(Http, UnreachableEndpointIsTransient) {
  ScopedEnv key("GLOW_TEST_API_KEY", "k");
  HttpBackendConfig c;
  c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  c.api_key_env = "GLOW_TEST_API_KEY";
  c.timeout = std::chrono::seconds(1);
  HttpBackend backend(c);
  EXPECT_THROW(backend.complete(request("x")), TransientBackendError);
}

TEST(Http, EndpointSplitting) {
  EXPECT_EQ(split_endpoint("https://host:8443/v1/chat"), (std::pair<std::string, std::string>{"https://host:8443", "/v1/chat"}));
  EXPECT_EQ(split_endpoint("http://host").second, "/");
  EXPECT_THROW(split_endpoint("host/v1"), ConfigError);
}
