#include <gtest/gtest.h>

#include "groundmem/error.hpp"
#include "groundmem/phase1.hpp"
#include "groundmem/reasoner.hpp"
#include "support.hpp"

using namespace groundmem;

namespace {

struct Scripted : Gateway {
  std::function<std::string(const ChatRequest&)> reply;
  std::unique_ptr<Gateway> inner = fixture::mock();
  std::string chat(const ChatRequest& r) override { return reply ? reply(r) : inner->chat(r); }
  Canvas edit_image(const ImageEditRequest& r) override { return inner->edit_image(r); }
  Embedding embed_text(std::string_view t) override { return inner->embed_text(t); }
  Embedding embed_image(const Canvas& c) override { return inner->embed_image(c); }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::ConfigError;
}

const BuildResult& built(const std::string& id) {
  static std::map<std::string, BuildResult> cache;
  if (!cache.contains(id)) {
    auto gw = fixture::mock();
    cache.emplace(id, build_memory(fixture::scenario(id), {}, *gw));
  }
  return cache.at(id);
}

}  // namespace

TEST(Plan, MockPlannerResolvesDeixis) {
  auto gw = fixture::mock();
  const auto p = make_plan("What was the color of the stair in my basement like?", Speaker::B, *gw);
  ASSERT_EQ(p.steps.size(), 3u);
  EXPECT_EQ(p.steps[0].command, Command::Pov);
  EXPECT_EQ(resolve_pov(p.steps[0].instruction), Pov::B);
  EXPECT_EQ(p.steps[1].command, Command::Rag);
  EXPECT_EQ(p.steps[2].command, Command::FinalAnswer);
  EXPECT_EQ(resolve_pov(make_plan("What was in your kitchen?", Speaker::B, *gw).steps[0].instruction), Pov::A);
  EXPECT_EQ(resolve_pov(make_plan("What was in the kitchen?", Speaker::B, *gw).steps[0].instruction), Pov::Both);
}

TEST(Plan, InvalidTwiceFails) {
  Scripted gw;
  int calls = 0;
  gw.reply = [&](const ChatRequest&) {
    ++calls;
    return std::string("<answer><item>POV B</item><item>RAG[2] x</item></answer>");
  };
  EXPECT_EQ(code_of([&] { make_plan("q?", Speaker::B, gw); }), ErrorCode::PlanInvalid);
  EXPECT_EQ(calls, 2);
}

TEST(Refine, KeepsCommandAndFallsBackOnFailure) {
  auto gw = fixture::mock();
  const PlanStep rag{Command::Rag, "find where B described the basement", 5};
  const auto r = refine_instruction(rag, "What was the color of the stair in my basement like?", *gw);
  EXPECT_EQ(r.command, Command::Rag);
  EXPECT_EQ(r.retrieval_count, 5);
  EXPECT_EQ(r.instruction, "basement staircase color");

  Scripted broken;
  broken.reply = [](const ChatRequest&) -> std::string { fail(ErrorCode::Timeout, "slow"); };
  EXPECT_EQ(refine_instruction(rag, "q", broken), rag);
}

TEST(Answer, StaircaseQuestionStaysInAskersView) {
  auto gw = fixture::mock();
  const auto t = answer_question("What was the color of the stair in my basement like?", Speaker::B,
                                 built("basement").bank, {}, *gw);
  EXPECT_EQ(t.answer, "white");
  ASSERT_FALSE(t.evidence_frames.empty());
  for (const auto& f : t.evidence_frames) EXPECT_EQ(f[0], 'B') << f;
  EXPECT_EQ(t.retrieve_calls, 1);
}

TEST(Answer, RugQuestionUsesLatestBathroom) {
  auto gw = fixture::mock();
  const auto t = answer_question("Can you remind me of the color of the rug present in the red tub room?", Speaker::B,
                                 built("bathroom").bank, {}, *gw);
  EXPECT_EQ(t.answer, "yellow");
}

TEST(Answer, BinaryQuestionsGetYesOrNo) {
  auto gw = fixture::mock();
  const auto& bank = built("home_office").bank;
  EXPECT_EQ(answer_question("Was there a drum set in my home office?", Speaker::B, bank, {}, *gw).answer, "yes");
  EXPECT_EQ(answer_question("Was there a piano in my home office?", Speaker::B, bank, {}, *gw).answer, "no");
}

TEST(Answer, IndirectRequestIsReprompted) {
  auto gw = fixture::mock();
  const auto& bank = built("home_office").bank;
  const std::string q = "Do you remember the color of the fridge in my kitchen?";
  const auto patched = answer_question(q, Speaker::B, bank, {}, *gw);
  EXPECT_TRUE(patched.reprompted);
  EXPECT_EQ(patched.answer, "white");
  ReasonerConfig faithful;
  faithful.indirect_request_rule = false;
  EXPECT_EQ(answer_question(q, Speaker::B, bank, faithful, *gw).answer, "yes");
}

TEST(Answer, EmptyBankAbstains) {
  auto gw = fixture::mock();
  MemoryBank empty;
  const auto t = answer_question("What was in my kitchen?", Speaker::A, empty, {}, *gw);
  EXPECT_EQ(t.answer, "not specified");
  EXPECT_EQ(t.retrieve_calls, 1);
  EXPECT_EQ(code_of([&] { answer_question("", Speaker::A, empty, {}, *gw); }), ErrorCode::PreconditionViolation);
}

TEST(Answer, FailingStepIsReportedWithIndex) {
  Scripted gw;
  gw.reply = [&](const ChatRequest& r) {
    if (r.role == Role::Answerer) fail(ErrorCode::Timeout, "slow");
    return gw.inner->chat(r);
  };
  try {
    answer_question("What was in my kitchen?", Speaker::B, built("home_office").bank, {}, gw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepFailed);
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos) << e.what();
  }
}

TEST(Trace, JsonRoundTrip) {
  auto gw = fixture::mock();
  const auto t = answer_question("Which room was north of my kitchen?", Speaker::B, built("home_office").bank, {}, *gw);
  EXPECT_EQ(t.answer, "home office");
  const auto j = trace_to_json(t);
  EXPECT_EQ(trace_to_json(trace_from_json(j)), j);
}

TEST(Trace, IndirectDetection) {
  EXPECT_TRUE(is_indirect_request("Do you remember the walls?"));
  EXPECT_TRUE(is_indirect_request("do you recall my first room"));
  EXPECT_FALSE(is_indirect_request("What color were the walls?"));
  EXPECT_TRUE(is_bare_affirmation("Yes, I do."));
  EXPECT_FALSE(is_bare_affirmation("yes, they were green"));
}

TEST(FullDialog, AnswersFromTranscriptWithoutRetrieval) {
  auto gw = fixture::mock();
  const auto t = answer_from_transcript("Can you remind me of the color of the rug present in the red tub room?",
                                        Speaker::B, fixture::scenario("bathroom"), *gw);
  EXPECT_EQ(t.retrieve_calls, 0);
  EXPECT_EQ(t.answer, "yellow");
}
