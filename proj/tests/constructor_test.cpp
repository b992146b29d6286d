#include <gtest/gtest.h>

#include "groundmem/canvas.hpp"
#include "groundmem/constructor.hpp"
#include "groundmem/error.hpp"
#include "support.hpp"

using namespace groundmem;

namespace {

const FrameId kB1 = {Speaker::B, 1, 1};

FaithfulnessReport report(int index, double phi) {
  FaithfulnessReport r;
  r.candidate_index = index;
  r.phi = phi;
  return r;
}

}  // namespace

TEST(Prompts, CreationPromptUsesStylePreambleAndBlueAssumptions) {
  auto gw = fixture::mock();
  EXPECT_EQ(build_creation_prompt("in bedroom", "bedroom", *gw),
            "A clean, minimalist, iconic scene. In a bedroom, a bed (in blue outline), a nightstand (in blue "
            "outline), and a lamp (in blue outline). Solid white background, no shadows.");
}

TEST(Prompts, EditPromptReplacesAndKeeps) {
  auto gw = fixture::mock();
  const std::vector<std::string> history = {build_creation_prompt("in bedroom", "bedroom", *gw)};
  const auto p = build_edit_prompt("red and grey striped bedspread", history, nullptr, *gw);
  EXPECT_NE(p.find("Replace the bed (in blue outline) with a bed (in black outline)"), std::string::npos) << p;
  EXPECT_NE(p.find("Keep the nightstand and lamp unchanged."), std::string::npos) << p;
}

TEST(Prompts, MoveBecomesDeleteThenAdd) {
  auto gw = fixture::mock();
  const std::vector<std::string> history = {build_creation_prompt("in bedroom", "bedroom", *gw)};
  const auto p = build_edit_prompt("move the lamp to the window", history, nullptr, *gw);
  const auto del = p.find("DELETE"), sep = p.find("$$$"), add = p.find("ADD");
  ASSERT_NE(del, std::string::npos);
  EXPECT_LT(del, sep);
  EXPECT_LT(sep, add);
}

TEST(Facts, AreAtomic) {
  auto gw = fixture::mock();
  std::vector<std::string> texts;
  for (const auto& f : decompose_facts("a red cat on a sofa", {}, kB1, *gw)) texts.push_back(f.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"There is a cat", "The cat is red", "The cat is on a sofa"}));
}

TEST(Facts, ExcludeAssumedObjects) {
  auto gw = fixture::mock();
  const std::vector<std::string> history = {
      "A clean, minimalist, iconic scene. In a home office, a desk (in blue outline). Solid white background, no "
      "shadows."};
  for (const auto& f : decompose_facts("a home office", history, kB1, *gw)) {
    EXPECT_EQ(f.text.find("desk"), std::string::npos) << f.text;
  }
}

TEST(Facts, EmptyDescriptorIsRejected) {
  auto gw = fixture::mock();
  try {
    decompose_facts("", {}, kB1, *gw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(Selection, TakesFirstMaximum) {
  EXPECT_EQ(select_artifact({report(0, 0.5), report(1, 1.0), report(2, 0.75)}), 1u);
  EXPECT_EQ(select_artifact({report(0, 1.0), report(1, 1.0)}), 0u);
  EXPECT_EQ(select_artifact({report(0, 0.0)}), 0u);
}

TEST(Candidates, SamplesDifferOnlyBySeed) {
  auto gw = fixture::mock();
  const auto p = build_creation_prompt("in kitchen", "kitchen", *gw);
  const auto a = generate_candidates(p, nullptr, 3, kB1, *gw);
  const auto b = generate_candidates(p, nullptr, 3, kB1, *gw);
  ASSERT_EQ(a.canvases.size(), 3u);
  EXPECT_EQ(a.canvases, b.canvases);
  EXPECT_EQ(generate_candidates(p, nullptr, 1, kB1, *gw).canvases.size(), 1u);
}

TEST(Candidates, FailWhenBackendIsDown) {
  struct Down : Gateway {
    std::string chat(const ChatRequest&) override { fail(ErrorCode::BackendUnreachable, "down"); }
    Canvas edit_image(const ImageEditRequest&) override { fail(ErrorCode::BackendUnreachable, "down"); }
    Embedding embed_text(std::string_view) override { fail(ErrorCode::BackendUnreachable, "down"); }
    Embedding embed_image(const Canvas&) override { fail(ErrorCode::BackendUnreachable, "down"); }
  } gw;
  try {
    generate_candidates("A clean scene.", nullptr, 3, kB1, gw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CandidateGenerationFailed);
  }
}

TEST(Faithfulness, DrumSetCanvasIsFullyFaithful) {
  auto gw = fixture::mock();
  ImageEditRequest create;
  create.prompt = build_creation_prompt("a home office", "home office", *gw);
  create.frame_tag = "B_3";
  auto office = std::make_shared<const Canvas>(gw->edit_image(create));
  ImageEditRequest edit;
  edit.base = office;
  edit.prompt = build_edit_prompt("a drum set", {create.prompt}, office, *gw);
  edit.frame_tag = "B_3_seq2";
  auto drums = std::make_shared<const Canvas>(gw->edit_image(edit));
  const std::vector<AtomicFact> f = {{"There is a drum set", kB1}, {"The scene is a home office", kB1}};
  EXPECT_DOUBLE_EQ(faithfulness(drums, 0, f, *gw).phi, 1.0);
  EXPECT_DOUBLE_EQ(faithfulness(drums, 0, {}, *gw).phi, 1.0);
}

TEST(Summaries, CreateAndUpdate) {
  auto gw = fixture::mock();
  EXPECT_NE(summarize_scene("in bedroom", std::nullopt, "bedroom", *gw).find("bedroom"), std::string::npos);
  const auto rugs = summarize_scene("white toilet and yellow rug", std::string("The scene is a bathroom. There is a red rug."),
                                    "", *gw);
  EXPECT_NE(rugs.find("red rug"), std::string::npos) << rugs;
  EXPECT_NE(rugs.find("yellow rug"), std::string::npos) << rugs;
  const auto wall = summarize_scene("Actually, it's blue", std::string("The scene is a bedroom. The wall is green."), "", *gw);
  EXPECT_NE(wall.find("blue wall"), std::string::npos) << wall;
  EXPECT_EQ(wall.find("green"), std::string::npos) << wall;
}

TEST(Construct, VisualReplayGrowsRegistry) {
  auto gw = fixture::mock();
  ConstructorConfig config;
  std::shared_ptr<const ArtifactVersion> prev;
  std::vector<std::string> history;
  const std::vector<std::pair<EditAction, std::string>> steps = {
      {EditAction::New, "a home office"}, {EditAction::Continue, "a drum set"}, {EditAction::Continue, "2 guitars on the wall"}};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    ObserverDecision d;
    d.action = steps[i].first;
    d.scene_descriptor = steps[i].second;
    d.frame_meta = i == 0 ? "home office" : "";
    const FrameId target{Speaker::B, 3, static_cast<int>(i) + 1};
    const auto r = construct(d, target, 26 + static_cast<int>(i), prev, history, Condition::Visual, config, *gw);
    ASSERT_TRUE(r.version.canvas);
    ASSERT_TRUE(r.version.phi);
    if (prev) {
      for (const auto& o : prev->canvas->objects) {
        const auto& now = r.version.canvas->objects;
        EXPECT_NE(std::find(now.begin(), now.end(), o), now.end()) << o.name;
      }
    }
    history.push_back(r.version.prompt);
    prev = std::make_shared<const ArtifactVersion>(r.version);
  }
  std::vector<std::string> names;
  for (const auto& o : prev->canvas->objects) names.push_back(o.name);
  EXPECT_NE(std::find(names.begin(), names.end(), "drum set"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "guitar"), names.end());
}

TEST(Construct, TextualReplayAccumulatesSummary) {
  auto gw = fixture::mock();
  std::shared_ptr<const ArtifactVersion> prev;
  int i = 0;
  for (const char* delta : {"a home office", "a drum set", "2 guitars on the wall"}) {
    ObserverDecision d;
    d.action = i == 0 ? EditAction::New : EditAction::Continue;
    d.scene_descriptor = delta;
    d.frame_meta = i == 0 ? "home office" : "";
    const auto r = construct(d, {Speaker::B, 3, i + 1}, 26 + i, prev, {}, Condition::Textual, {}, *gw);
    EXPECT_FALSE(r.version.canvas);
    ASSERT_TRUE(r.version.summary);
    prev = std::make_shared<const ArtifactVersion>(r.version);
    ++i;
  }
  const auto& s = *prev->summary;
  for (const char* want : {"home office", "drum set", "2 guitars"}) EXPECT_NE(s.find(want), std::string::npos) << s;
}
