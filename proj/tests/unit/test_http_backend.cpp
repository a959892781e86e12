#include "cor/llm_backend.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

using namespace cor;
using namespace cor::backend;
using nlohmann::json;

namespace {

// Local chat-completions stand-in. `reply` decides each response from the
// request body and the 1-based call number.
class FakeServer {
public:
    using Reply = std::function<void(const json&, int, httplib::Response&)>;

    explicit FakeServer(Reply reply) : reply_(std::move(reply)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = ++calls_;
            {
                std::lock_guard lock(mu_);
                last_auth_ = req.get_header_value("Authorization");
                last_body_ = json::parse(req.body);
            }
            reply_(last_body(), n, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    int calls() const { return calls_.load(); }
    json last_body() const {
        std::lock_guard lock(mu_);
        return last_body_;
    }
    std::string last_auth() const {
        std::lock_guard lock(mu_);
        return last_auth_;
    }

private:
    Reply reply_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> calls_{0};
    mutable std::mutex mu_;
    json last_body_;
    std::string last_auth_;
};

void ok_reply(httplib::Response& res, const std::string& content) {
    const json body{{"choices", json::array({json{{"message", json{{"role", "assistant"}, {"content", content}}}}})},
                    {"usage", json{{"prompt_tokens", 11}, {"completion_tokens", 7}}}};
    res.status = 200;
    res.set_content(body.dump(), "application/json");
}

HttpBackendConfig config_for(const FakeServer& s) {
    HttpBackendConfig c;
    c.url = s.url();
    c.model = "tiny";
    c.bearer_token = "secret";
    c.max_attempts = 3;
    c.base_delay = std::chrono::milliseconds(1);
    c.max_delay = std::chrono::milliseconds(4);
    c.timeout = std::chrono::seconds(5);
    return c;
}

}  // namespace

TEST_CASE("successful completion") {
    FakeServer server([](const json&, int, httplib::Response& res) { ok_reply(res, "## Answer: Paris"); });
    HttpBackend b(config_for(server));
    CHECK(b.id() == "http:tiny@" + server.url());
    const auto r = b.generate({"the prompt", std::nullopt, 32, 0.0, 42, "q"});
    CHECK(r.text == "## Answer: Paris");
    REQUIRE(r.usage.has_value());
    CHECK(r.usage->prompt_tokens == 11);
    CHECK(r.usage->completion_tokens == 7);
    CHECK(server.last_auth() == "Bearer secret");
    const auto body = server.last_body();
    CHECK(body["model"] == "tiny");
    CHECK(body["max_tokens"] == 32);
    CHECK(body["seed"] == 42);
    CHECK(body["messages"].size() == 1);
    CHECK(body["messages"][0]["content"] == "the prompt");
}

TEST_CASE("transient failures are retried") {
    FakeServer server([](const json&, int n, httplib::Response& res) {
        if (n == 1) {
            res.status = 503;
        } else {
            ok_reply(res, "ok");
        }
    });
    HttpBackend b(config_for(server));
    CHECK(b.generate({"p", std::nullopt, 8, 0.0, std::nullopt, "q"}).text == "ok");
    CHECK(server.calls() == 2);
}

TEST_CASE("persistent failures exhaust the attempt budget") {
    FakeServer server([](const json&, int, httplib::Response& res) { res.status = 503; });
    HttpBackend b(config_for(server));
    try {
        (void)b.generate({"p", std::nullopt, 8, 0.0, std::nullopt, "q"});
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.attempts() == 3);
    }
    CHECK(server.calls() == 3);
}

TEST_CASE("client errors are not retried") {
    FakeServer server([](const json&, int, httplib::Response& res) {
        res.status = 401;
        res.set_content("nope", "text/plain");
    });
    HttpBackend b(config_for(server));
    CHECK_THROWS_AS((void)b.generate({"p", std::nullopt, 8, 0.0, std::nullopt, "q"}), BackendError);
    CHECK(server.calls() == 1);
}

TEST_CASE("prefill requests") {
    SUBCASE("accepted prefill continues the assistant message") {
        FakeServer server([](const json&, int, httplib::Response& res) { ok_reply(res, "\n## Answer: x"); });
        auto cfg = config_for(server);
        cfg.prefill = true;
        HttpBackend b(cfg);
        const auto r = b.generate({"p", std::string("## Relevant Context ID: 2"), 8, 0.0, std::nullopt, "q"});
        CHECK(r.text == "## Relevant Context ID: 2\n## Answer: x");
        const auto body = server.last_body();
        CHECK(body["messages"].size() == 2);
        CHECK(body["messages"][1]["role"] == "assistant");
        CHECK(body["continue_final_message"] == true);
        CHECK(body["add_generation_prompt"] == false);
    }
    SUBCASE("rejected prefill falls back to the prompt") {
        FakeServer server([](const json& body, int, httplib::Response& res) {
            if (body.contains("continue_final_message")) {
                res.status = 400;
            } else {
                ok_reply(res, "\n## Answer: x");
            }
        });
        auto cfg = config_for(server);
        cfg.prefill = true;
        HttpBackend b(cfg);
        GenRequest r{"p", std::string("## Relevant Context ID: 2"), 8, 0.0, std::nullopt, "q"};
        CHECK_THROWS_AS((void)b.generate(r), CapabilityError);
        const auto resp = generate_with_fallback(b, r);
        CHECK(resp.prefix_in_prompt);
        CHECK(resp.text == "## Relevant Context ID: 2\n## Answer: x");
        CHECK(server.last_body()["messages"][0]["content"] == "p\n## Relevant Context ID: 2");
    }
    SUBCASE("prefill disabled") {
        FakeServer server([](const json&, int, httplib::Response& res) { ok_reply(res, "x"); });
        HttpBackend b(config_for(server));
        CHECK_THROWS_AS((void)b.generate({"p", std::string("pre"), 8, 0.0, std::nullopt, "q"}), CapabilityError);
        CHECK(server.calls() == 0);
    }
}

TEST_CASE("bad configuration") {
    HttpBackendConfig c;
    c.url = "localhost:8000";
    CHECK_THROWS_AS(HttpBackend{c}, ConfigError);
    c.url = "ftp://host/x";
    CHECK_THROWS_AS(HttpBackend{c}, ConfigError);
    c.url = "http:///x";
    CHECK_THROWS_AS(HttpBackend{c}, ConfigError);
    c.url = "http://host/x";
    c.max_attempts = 0;
    CHECK_THROWS_AS(HttpBackend{c}, ConfigError);
}
