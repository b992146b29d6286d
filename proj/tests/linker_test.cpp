#include <gtest/gtest.h>

#include "groundmem/error.hpp"
#include "groundmem/linker.hpp"
#include "support.hpp"

using namespace groundmem;

namespace {

FrameId id(const char* s) { return parse_frame_id(s); }

RelationGraph graph_with(std::initializer_list<const char*> frames) {
  RelationGraph g;
  for (auto f : frames) g.add_frame(id(f));
  return g;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(Predicates, NormalizeAliases) {
  EXPECT_EQ(normalize_predicate("north_of"), "is_north_of");
  EXPECT_EQ(normalize_predicate("Is North Of"), "is_north_of");
  EXPECT_EQ(normalize_predicate("is-next-to"), "is_next_to");
  EXPECT_FALSE(normalize_predicate("is_above"));
  EXPECT_EQ(inverse_predicate("is_north_of"), "is_south_of");
  EXPECT_EQ(inverse_predicate("is_next_to"), "is_next_to");
  EXPECT_FALSE(inverse_predicate("is_revisit_of"));
}

TEST(ExtractLinks, MovementGivesDirection) {
  auto gw = fixture::mock();
  const auto r = extract_links("I moved north from a kitchen to get here", {}, {id("B_2"), id("B_3"), std::nullopt},
                               {"B_1: living room", "B_2: kitchen", "B_3: home office"}, *gw);
  ASSERT_EQ(r.triplets.size(), 1u);
  EXPECT_EQ(r.triplets[0], (Triplet{id("B_3"), "is_north_of", id("B_2")}));
}

TEST(ExtractLinks, AdjacencyAndFiller) {
  auto gw = fixture::mock();
  const FrameContext fc{id("B_1"), id("B_2"), std::nullopt};
  const std::vector<std::string> table = {"B_1: hall", "B_2: kitchen"};
  const auto next = extract_links("Kitchen next to Hall", {}, fc, table, *gw);
  ASSERT_EQ(next.triplets.size(), 1u);
  EXPECT_EQ(next.triplets[0], (Triplet{id("B_1"), "is_next_to", id("B_2")}));
  EXPECT_TRUE(extract_links("ok", {}, fc, table, *gw).triplets.empty());
}

TEST(ExtractLinks, DropsCandidatesOutsideTheContext) {
  struct Rogue : Gateway {
    std::string chat(const ChatRequest&) override {
      return R"({"triplets":[{"subject":"B_3","predicate":"north_of","object":"B_9"},
                             {"subject":"B_3","predicate":"is_above","object":"B_2"},
                             {"subject":"B_3","predicate":"is_north_of","object":"B_3"},
                             {"subject":"B_3","predicate":"north of","object":"B_2"}]})";
    }
    Canvas edit_image(const ImageEditRequest&) override { return {}; }
    Embedding embed_text(std::string_view) override { return {}; }
    Embedding embed_image(const Canvas&) override { return {}; }
  } gw;
  const auto r = extract_links("moved north", {}, {id("B_2"), id("B_3"), std::nullopt}, {}, gw);
  ASSERT_EQ(r.triplets.size(), 1u);
  EXPECT_EQ(r.triplets[0], (Triplet{id("B_3"), "is_north_of", id("B_2")}));
  EXPECT_EQ(r.diagnostics.size(), 3u);
}

TEST(Graph, InsertIsIdempotent) {
  auto g = graph_with({"B_2", "B_3"});
  const Triplet t{id("B_3"), "is_north_of", id("B_2")};
  g.insert(t);
  g.insert(t);
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.neighbors(id("B_2")), std::vector<Triplet>{t});
  EXPECT_EQ(code_of([&] { g.neighbors(id("B_9")); }), ErrorCode::UnknownFrame);
  EXPECT_EQ(code_of([&] { g.insert({id("B_3"), "is_north_of", id("B_9")}); }), ErrorCode::UnknownFrame);
  EXPECT_EQ(code_of([&] { g.insert({id("B_3"), "north_of", id("B_2")}); }), ErrorCode::InvalidTriplet);
}

TEST(Graph, InverseQueries) {
  auto g = graph_with({"B_2", "B_3"});
  g.insert({id("B_3"), "is_north_of", id("B_2")});
  const auto south = g.neighbors(id("B_2"), "is_south_of");
  ASSERT_EQ(south.size(), 1u);
  EXPECT_EQ(south[0], (Triplet{id("B_2"), "is_south_of", id("B_3")}));
}

TEST(Graph, TripletsForDeduplicates) {
  auto g = graph_with({"B_2", "B_3"});
  g.insert({id("B_3"), "is_north_of", id("B_2")});
  EXPECT_EQ(g.triplets_for({id("B_3")}).size(), 1u);
  EXPECT_TRUE(g.triplets_for({}).empty());
  EXPECT_EQ(g.triplets_for({id("B_2"), id("B_3")}).size(), 1u);
}

TEST(Jsonl, RoundTrips) {
  const std::vector<Triplet> ts = {{id("B_3"), "is_north_of", id("B_2")}, {id("A_1"), "is_next_to", id("A_2")}};
  EXPECT_EQ(triplets_from_jsonl(to_jsonl(ts)), ts);
  EXPECT_EQ(to_jsonl({ts[0]}), "{\"object\":\"B_2\",\"predicate\":\"is_north_of\",\"subject\":\"B_3\"}\n");
  EXPECT_EQ(code_of([] { triplets_from_jsonl("{\"subject\":\"B_3\"}\n"); }), ErrorCode::FormatError);
}
