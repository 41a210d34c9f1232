#include "convstyle/embedding.hpp"
#include "convstyle/error.hpp"
#include "convstyle/llm_gateway.hpp"
#include "convstyle/prompt_builder.hpp"
#include "convstyle/util.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace convstyle {
namespace {

using testing::agent;
using testing::customer;

std::string read_fixture(const std::string& name) {
    std::ifstream in(testing::fixture_path("prompts/" + name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExemplarPair pair_of(Granularity g, std::vector<Turn> styled, std::vector<Turn> plain) {
    ExemplarPair p;
    p.granularity = g;
    p.styled = Conversation{"x", StyleDomain("H1"), std::move(styled)};
    p.style_free = Conversation{"x", StyleDomain::style_free(), std::move(plain)};
    return p;
}

std::size_t occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) ++n;
    return n;
}

TEST(PromptGolden, ReductionOneShotUtterance) {
    const std::vector<ExemplarPair> ex{pair_of(Granularity::Utterance,
                                               {agent("Certainly, your order has shipped. Regards.")},
                                               {agent("your order has shipped.")})};
    const auto input = testing::make_segment("c", 0, {agent("Kindly note that the refund is done.")}, Granularity::Utterance);
    const auto p = build_reduction_prompt(ex, input, {});
    EXPECT_EQ(p.text, read_fixture("reduction_1shot_utterance.txt"));
    EXPECT_EQ(p.stop_sequence, "\n###\n");
    EXPECT_EQ(p.expected_output_granularity, Granularity::Utterance);
}

TEST(PromptGolden, InjectionOneShotUtterance) {
    const std::vector<ExemplarPair> ex{pair_of(Granularity::Utterance,
                                               {agent("Certainly, your order has shipped. Regards.")},
                                               {agent("your order has shipped.")})};
    const auto input = testing::make_segment("c", 0, {agent("the refund is done.")}, Granularity::Utterance);
    EXPECT_EQ(build_injection_prompt(ex, input, {}).text, read_fixture("injection_1shot_utterance.txt"));
}

TEST(PromptGolden, ReductionTwoShotTwoTurn) {
    const std::vector<ExemplarPair> ex{
        pair_of(Granularity::TwoTurn, {customer("where is my card"), agent("hey! your card is on its way -Sam")},
                {customer("where is my card"), agent("your card is on its way")}),
        pair_of(Granularity::TwoTurn,
                {customer("my router is broken"), agent("oh no! a technician will call you ttyl! -Jo")},
                {customer("my router is broken"), agent("a technician will call you")})};
    const auto input = testing::make_segment(
        "c", 0, {customer("can you check my invoice"), agent("yeah so it was paid today -Becky")}, Granularity::TwoTurn);
    EXPECT_EQ(build_reduction_prompt(ex, input, {}).text, read_fixture("reduction_2shot_twoturn.txt"));
}

TEST(PromptGolden, InjectionOneShotTwoTurn) {
    const std::vector<ExemplarPair> ex{
        pair_of(Granularity::TwoTurn, {customer("where is my card"), agent("hey! your card is on its way -Sam")},
                {customer("where is my card"), agent("your card is on its way")})};
    const auto input = testing::make_segment("c", 0, {customer("can you check my invoice"), agent("it was paid today")},
                                             Granularity::TwoTurn);
    EXPECT_EQ(build_injection_prompt(ex, input, {}).text, read_fixture("injection_1shot_twoturn.txt"));
}

TEST(PromptGolden, ReductionOneShotLongWindow) {
    const std::vector<ExemplarPair> ex{pair_of(
        Granularity::LongWindow,
        {customer("hi"), agent("Good afternoon, how may I assist?"), customer("my parcel is late"),
         agent("We sincerely apologize; it arrives tomorrow.")},
        {customer("hi"), agent("hello, how can I help?"), customer("my parcel is late"), agent("it arrives tomorrow.")})};
    const auto input = testing::make_segment(
        "c", 0, {customer("hello"), agent("Good morning, what may I do for you?"), customer("reset my password")},
        Granularity::LongWindow);
    EXPECT_EQ(build_reduction_prompt(ex, input, {}).text, read_fixture("reduction_1shot_longwindow.txt"));
}

TEST(PromptGolden, InjectionTwoShotLongWindow) {
    const std::vector<ExemplarPair> ex{
        pair_of(Granularity::LongWindow,
                {customer("hi"), agent("hiya! whats up?"), customer("my parcel is late"),
                 agent("ugh sorry!! itll be there tmrw -Jo")},
                {customer("hi"), agent("hello, how can I help?"), customer("my parcel is late"),
                 agent("it arrives tomorrow.")}),
        pair_of(Granularity::LongWindow,
                {customer("where is my refund"), agent("good news, it went out today :) -Sam")},
                {customer("where is my refund"), agent("it was sent today.")})};
    const auto input = testing::make_segment("c", 0,
                                             {customer("hello"), agent("what can I do for you?"),
                                              customer("reset my password"), agent("I sent a reset link.")},
                                             Granularity::LongWindow);
    EXPECT_EQ(build_injection_prompt(ex, input, {}).text, read_fixture("injection_2shot_longwindow.txt"));
}

TEST(PromptGolden, CustomTemplateInjection) {
    PromptTemplate tmpl;
    tmpl.injection_header = "Make it sound like our brand.";
    tmpl.example_separator = "\n@@@\n";
    tmpl.stop_sequence = "\n@@@\n";
    tmpl.input_marker = "IN>";
    tmpl.output_marker = "OUT>";
    const std::vector<ExemplarPair> ex{
        pair_of(Granularity::Utterance, {agent("All done for you!")}, {agent("done")}),
        pair_of(Granularity::Utterance, {agent("Sent it your way!")}, {agent("sent")})};
    const auto input = testing::make_segment("c", 0, {agent("fixed")}, Granularity::Utterance);
    const auto p = build_injection_prompt(ex, input, tmpl);
    EXPECT_EQ(p.text, read_fixture("custom_template_injection_2shot.txt"));
    EXPECT_EQ(p.stop_sequence, "\n@@@\n");
}

TEST(PromptBuilder, KShotPromptHasExactlyKSeparators) {
    for (std::size_t k = 1; k <= 12; ++k) {
        const auto set = testing::make_exemplar_set(StyleDomain("B"), testing::casual_lexicon(), Granularity::TwoTurn, k, k);
        const auto input = testing::make_segment("c", 0, {customer("hi"), agent("hey there")}, Granularity::TwoTurn);
        EXPECT_EQ(occurrences(build_reduction_prompt(set.pairs(), input, {}).text, "\n###\n"), k);
        EXPECT_EQ(occurrences(build_injection_prompt(set.pairs(), input, {}).text, "\n###\n"), k);
    }
}

TEST(PromptBuilder, RejectsEmptyAndMismatchedExemplars) {
    const auto input = testing::make_segment("c", 0, {agent("x")}, Granularity::Utterance);
    try {
        build_reduction_prompt({}, input, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyExemplars);
    }
    const std::vector<ExemplarPair> ex{pair_of(Granularity::TwoTurn, {customer("a"), agent("b")}, {customer("a"), agent("b")})};
    try {
        build_injection_prompt(ex, input, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::GranularityMismatch);
    }
}

TEST(PromptTemplate, ValidationCatchesBrokenTemplates) {
    PromptTemplate t;
    EXPECT_NO_THROW(t.validate());
    t.stop_sequence = "\n---\n";
    EXPECT_THROW(t.validate(), Error);
    t = {};
    t.input_marker = "";
    EXPECT_THROW(t.validate(), Error);
    t = {};
    t.output_marker = "Out\nput";
    EXPECT_THROW(t.validate(), Error);
    t = {};
    t.reduction_header = "A\n###\nB";
    EXPECT_THROW(t.validate(), Error);
}

TEST(PromptBuilder, ExtractInputTranscriptRecoversFinalBlock) {
    const auto set = testing::make_exemplar_set(StyleDomain("H1"), testing::formal_lexicon(), Granularity::TwoTurn, 3, 5);
    const auto input = testing::make_segment("c", 0, {customer("where is it"), agent("on its way")}, Granularity::TwoTurn);
    const auto p = build_reduction_prompt(set.pairs(), input, {});
    EXPECT_EQ(extract_input_transcript(p.text, {}), "[Customer] where is it\n[Agent] on its way");
    EXPECT_FALSE(extract_input_transcript("no markers here", {}).has_value());
}

TEST(ParseCompletion, HandCases) {
    const auto two = parse_completion("[Customer] hi\n[Agent] hello", Granularity::TwoTurn);
    ASSERT_EQ(two.turns.size(), 2u);
    EXPECT_EQ(two.turns[1].text, "hello");

    const auto preamble = parse_completion("Sure, here you go:\n[Agent] done", Granularity::Utterance);
    ASSERT_EQ(preamble.turns.size(), 1u);
    EXPECT_EQ(preamble.turns[0].text, "done");

    const auto one_blank = parse_completion("[Customer] a\n\n[Agent] b\nnotes after", Granularity::LongWindow);
    EXPECT_EQ(one_blank.turns.size(), 2u);

    const auto two_blanks = parse_completion("[Customer] a\n\n\n[Agent] b", Granularity::LongWindow);
    EXPECT_EQ(two_blanks.turns.size(), 1u);

    const auto first_agent = parse_completion("[Customer] q\n[Agent] first\n[Agent] second", Granularity::Utterance);
    ASSERT_EQ(first_agent.turns.size(), 1u);
    EXPECT_EQ(first_agent.turns[0].text, "first");

    try {
        parse_completion("nothing tagged", Granularity::TwoTurn);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoParseableTurns);
    }
    try {
        parse_completion("[Customer] only me", Granularity::Utterance);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoAgentTurn);
    }
    const auto cust = parse_completion("[Agent] a\n[Customer] c", Granularity::Utterance, std::nullopt, Speaker::Customer);
    EXPECT_EQ(cust.turns[0].text, "c");
}

TEST(ParseCompletion, RoundTripsRenderedSegments) {
    for (auto g : {Granularity::Utterance, Granularity::TwoTurn, Granularity::LongWindow}) {
        const auto corpus = testing::make_styled_corpus(StyleDomain("B"), testing::casual_lexicon(), 4, 11, 9);
        for (const auto& c : corpus.conversations) {
            for (const auto& s : segment_conversation(c, g)) {
                EXPECT_EQ(parse_completion(render_transcript(s.turns), g).turns, s.turns);
            }
        }
    }
}

CompletionRequest request_for(const std::string& prompt_text) {
    return make_request(PromptText{prompt_text, "\n###\n", Granularity::Utterance}, DecodingConfig{});
}

TEST(ScriptedMock, ExactBeatsContainsAndContainsFollowsFileOrder) {
    const auto mock = load_mock_script(
        "{\"match\":\"contains\",\"key\":\"refund\",\"reply\":\"first contains\"}\n"
        "{\"match\":\"contains\",\"key\":\"refund please\",\"reply\":\"second contains\"}\n"
        "{\"match\":\"exact\",\"key\":\"refund please\",\"reply\":\"exact\"}\n");
    EXPECT_EQ(mock->complete(request_for("refund please")).text, "exact");
    EXPECT_EQ(mock->complete(request_for("my refund please now")).text, "first contains");
    try {
        mock->complete(request_for("unrelated"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ScriptMiss);
    }
    EXPECT_EQ(mock->call_count(), 3u);
}

TEST(ScriptedMock, EchoFallbackAndStopTruncation) {
    const auto mock = load_mock_script(
        "{\"mode\":\"echo_input\"}\n"
        "{\"match\":\"contains\",\"key\":\"cut me\",\"reply\":\"[Agent] kept\\n###\\n[Agent] dropped\"}\n");
    EXPECT_TRUE(mock->echo_input());
    const auto set = testing::make_exemplar_set(StyleDomain("H1"), testing::formal_lexicon(), Granularity::Utterance, 2, 1);
    const auto input = testing::make_segment("c", 0, {agent("your box is here")}, Granularity::Utterance);
    const auto prompt = build_reduction_prompt(set.pairs(), input, {});
    EXPECT_EQ(mock->complete(make_request(prompt, {})).text, "[Agent] your box is here");
    EXPECT_EQ(mock->complete(request_for("please cut me")).text, "[Agent] kept");
}

TEST(ScriptedMock, MalformedScriptLines) {
    EXPECT_THROW(load_mock_script("{\"match\":\"regex\",\"key\":\"a\",\"reply\":\"b\"}"), MalformedRecordError);
    EXPECT_THROW(load_mock_script("{\"mode\":\"random\"}"), MalformedRecordError);
    EXPECT_THROW(load_mock_script("not json"), MalformedRecordError);
}

TEST(Gateway, TruncateAndRequestValidation) {
    EXPECT_EQ(truncate_at_stop("abc\n###\ndef", "\n###\n"), "abc");
    EXPECT_EQ(truncate_at_stop("abc", "\n###\n"), "abc");
    DecodingConfig d;
    EXPECT_EQ(make_request(PromptText{"p", "s", Granularity::LongWindow}, d).max_tokens, d.max_tokens_long);
    EXPECT_EQ(make_request(PromptText{"p", "s", Granularity::TwoTurn}, d).max_tokens, d.max_tokens_short);
    auto mock = testing::echo_mock();
    auto bad = request_for("x");
    bad.top_k = 0;
    EXPECT_THROW(mock->complete(bad), Error);
    EXPECT_THROW(mock->complete(request_for("")), Error);
}

/// Local HTTP server that fails the first `failures` requests with 503.
class FakeBackend {
public:
    explicit FakeBackend(int failures) : failures_(failures) {
        server_.Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_auth = req.get_header_value("Authorization");
            if (failures_-- > 0) {
                res.status = 503;
                return;
            }
            const auto body = Json::parse(req.body);
            last_body = body;
            res.set_content(Json{{"text", "[Agent] remote reply\n###\n[Agent] junk"}}.dump(), "application/json");
        });
        server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            const auto body = Json::parse(req.body);
            Json vectors = Json::array();
            for (const auto& t : body.at("texts")) {
                const auto s = t.get<std::string>();
                vectors.push_back(Json::array({static_cast<double>(s.size()), 1.0, 0.0}));
            }
            res.set_content(Json{{"vectors", vectors}}.dump(), "application/json");
        });
        server_.Post("/v1/bad", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeBackend() {
        server_.stop();
        thread_.join();
    }

    [[nodiscard]] HttpOptions options() const {
        HttpOptions o;
        o.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        o.initial_backoff = std::chrono::milliseconds(1);
        o.timeout = std::chrono::milliseconds(2000);
        return o;
    }

    std::atomic<int> hits{0};
    std::string last_auth;
    Json last_body;

private:
    httplib::Server server_;
    std::atomic<int> failures_;
    int port_ = 0;
    std::thread thread_;
};

TEST(RemoteCompletion, RetriesTransientFailuresAndStripsStop) {
    FakeBackend backend(2);
    auto opts = backend.options();
    opts.auth_header_value = "Bearer secret";
    RemoteCompletionClient client(opts, "fake");
    const auto r = client.complete(request_for("hello"));
    EXPECT_EQ(r.text, "[Agent] remote reply");
    EXPECT_EQ(r.model_name, "fake");
    EXPECT_EQ(backend.hits.load(), 3);
    EXPECT_EQ(backend.last_auth, "Bearer secret");
    EXPECT_EQ(backend.last_body.at("prompt"), "hello");
    EXPECT_EQ(backend.last_body.at("stop"), Json::array({"\n###\n"}));
    EXPECT_DOUBLE_EQ(backend.last_body.at("temperature").get<double>(), 0.1);
}

TEST(RemoteCompletion, GivesUpAfterMaxRetries) {
    FakeBackend backend(100);
    auto opts = backend.options();
    opts.max_retries = 2;
    RemoteCompletionClient client(opts);
    try {
        client.complete(request_for("hello"));
        FAIL();
    } catch (const EndpointFailure& e) {
        EXPECT_EQ(e.status(), 503);
    }
    EXPECT_EQ(backend.hits.load(), 3);
}

TEST(RemoteHttp, ClientErrorsAreNotRetried) {
    FakeBackend backend(0);
    JsonHttpClient http(backend.options());
    EXPECT_THROW(http.post("/bad", Json::object()), EndpointFailure);
}

TEST(RemoteHttp, UnreachableEndpointFails) {
    HttpOptions o;
    o.endpoint = "http://127.0.0.1:1";
    o.max_retries = 1;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.timeout = std::chrono::milliseconds(500);
    EXPECT_THROW(JsonHttpClient(o).post("/complete", Json::object()), Error);
}

TEST(RemoteEmbedding, BatchesAndLearnsDimension) {
    FakeBackend backend(0);
    RemoteEmbedderOptions o;
    o.http = backend.options();
    o.batch_size = 2;
    RemoteEmbedder embedder(o);
    const std::vector<std::string> texts{"a", "bb", "ccc"};
    const auto vs = embedder.embed_batch(texts);
    ASSERT_EQ(vs.size(), 3u);
    EXPECT_EQ(vs[2].values, (std::vector<double>{3.0, 1.0, 0.0}));
    EXPECT_EQ(embedder.dimension(), 3u);
    EXPECT_EQ(backend.hits.load(), 2);
}

TEST(ConcurrencyLimiter, NeverExceedsBound) {
    ConcurrencyLimiter limiter(3);
    std::vector<std::thread> threads;
    for (int i = 0; i < 12; ++i) {
        threads.emplace_back([&] {
            ConcurrencyLimiter::Slot slot(limiter);
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_LE(limiter.peak(), 3u);
    EXPECT_GE(limiter.peak(), 1u);
}

}  // namespace
}  // namespace convstyle
