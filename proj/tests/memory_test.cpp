#include <gtest/gtest.h>

#include "groundmem/error.hpp"
#include "groundmem/memory.hpp"
#include "groundmem/persistence.hpp"
#include "groundmem/phase1.hpp"
#include "support.hpp"

using namespace groundmem;

namespace {

FrameId id(const char* s) { return parse_frame_id(s); }

Embedding unit(int dim, int i) {
  Embedding e = Embedding::Zero(dim);
  e[i] = 1.0;
  return e;
}

StoredVersion stored(const char* frame, Embedding visual, Embedding meta, std::optional<Embedding> summary = {}) {
  auto v = std::make_shared<ArtifactVersion>();
  v->frame_id = id(frame);
  v->canvas = Canvas::blank(4, 4);
  if (summary) v->summary = "s";
  StoredVersion s;
  s.version = v;
  s.visual = std::move(visual);
  s.metadata = std::move(meta);
  s.summary = std::move(summary);
  return s;
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

TEST(Score, HybridSubstitution) {
  const auto s = stored("B_1", unit(4, 0), unit(4, 1));
  EXPECT_DOUBLE_EQ(score_visual(s, unit(4, 0), 0.7), 0.7);
  EXPECT_DOUBLE_EQ(score_visual(s, unit(4, 1), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(score_visual(s, unit(4, 0), 1.0), 1.0);
  EXPECT_EQ(code_of([&] { score_visual(s, unit(4, 0), 1.5); }), ErrorCode::PreconditionViolation);
  StoredVersion blind = s;
  blind.visual.reset();
  EXPECT_EQ(code_of([&] { score_visual(blind, unit(4, 0), 0.7); }), ErrorCode::MissingCanvas);
}

TEST(Bank, OnlyLatestVersionIsRetrievable) {
  MemoryBank bank;
  bank.allocate(id("B_3"), "home office");
  bank.insert_cached(stored("B_3", unit(4, 0), unit(4, 0)));
  bank.insert_cached(stored("B_3_seq2", unit(4, 1), unit(4, 1)));
  EXPECT_EQ(bank.entry(id("B_3")).versions.size(), 2u);
  const auto hits = retrieve(bank, unit(4, 1), 5, Pov::Both, {});
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].version->frame_id, id("B_3_seq2"));
  EXPECT_EQ(code_of([&] { bank.insert_cached(stored("B_4", unit(4, 0), unit(4, 0))); }), ErrorCode::UnallocatedFrame);
  EXPECT_EQ(code_of([&] { bank.insert_cached(stored("B_3_seq4", unit(4, 0), unit(4, 0))); }),
            ErrorCode::PreconditionViolation);
}

TEST(Bank, TextualInsertCachesOnlyText) {
  auto gw = fixture::mock();
  MemoryBank bank;
  bank.condition = Condition::Textual;
  bank.allocate(id("A_1"), "kitchen");
  ArtifactVersion v;
  v.frame_id = id("A_1");
  v.summary = "The scene is a kitchen. There is a white fridge.";
  v.metadata = "kitchen";
  bank.insert(v, *gw);
  const auto& s = bank.entry(id("A_1")).latest();
  EXPECT_FALSE(s.visual);
  EXPECT_TRUE(s.summary);
}

TEST(Retrieve, FiltersByPerspective) {
  MemoryBank bank;
  int k = 0;
  for (const char* f : {"A_1", "A_2", "A_3", "B_1", "B_2", "B_3", "B_4"}) {
    bank.allocate(id(f), "room");
    bank.insert_cached(stored(f, unit(8, k % 8), unit(8, (k + 1) % 8)));
    ++k;
  }
  const auto hits = retrieve(bank, unit(8, 2), 10, Pov::B, {});
  ASSERT_EQ(hits.size(), 4u);
  for (const auto& h : hits) EXPECT_EQ(h.frame_id.speaker, Speaker::B);
  EXPECT_EQ(retrieve(bank, unit(8, 2), 100, Pov::Both, {}).size(), 7u);

  MemoryBank only_a;
  only_a.allocate(id("A_1"), "room");
  only_a.insert_cached(stored("A_1", unit(8, 0), unit(8, 0)));
  EXPECT_EQ(code_of([&] { retrieve(only_a, unit(8, 0), 5, Pov::B, {}); }), ErrorCode::EmptyBank);
}

TEST(Retrieve, BothConditionTakesBestChannelPerFrame) {
  MemoryBank bank;
  bank.allocate(id("A_1"), "x");
  bank.insert_cached(stored("A_1", unit(4, 0), unit(4, 0), unit(4, 1)));
  RetrievalOptions o;
  o.condition = Condition::Both;
  const auto v = retrieve(bank, unit(4, 0), 5, Pov::Both, o);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].channel, Channel::Visual);
  const auto t = retrieve(bank, unit(4, 1), 5, Pov::Both, o);
  EXPECT_EQ(t[0].channel, Channel::Textual);
  o.union_fusion = true;
  EXPECT_EQ(retrieve(bank, unit(4, 1), 5, Pov::Both, o).size(), 2u);
}

TEST(Evidence, CarriesMetadataAndTriplets) {
  auto gw = fixture::mock();
  const auto built = build_memory(fixture::scenario("home_office"), {}, *gw);
  const auto hits = retrieve(built.bank, "home office drum set", 1, Pov::B, {}, *gw);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].frame_id, id("B_3"));
  const auto pack = assemble_evidence(built.bank, hits);
  ASSERT_EQ(pack.size(), 1u);
  EXPECT_NE(pack[0].metadata.find("home office"), std::string::npos);
  ASSERT_EQ(pack[0].triplets.size(), 1u);
  EXPECT_EQ(pack[0].triplets[0], (Triplet{id("B_3"), "is_north_of", id("B_2")}));
  EXPECT_TRUE(assemble_evidence(built.bank, {}).empty());
}

TEST(Persistence, WritesTheDocumentedLayout) {
  auto gw = fixture::mock();
  BuildOptions o;
  o.condition = Condition::Both;
  const auto built = build_memory(fixture::scenario("home_office"), o, *gw);
  const auto dir = fixture::scratch_dir("bank") / "home_office";
  save_bank(built.bank, dir);
  for (const char* f : {"manifest.json", "links.jsonl", "embeddings.bin", "frames/B_3_seq3.png",
                        "frames/B_3_seq3.objects.json", "frames/B_3_seq3.summary.txt", "frames/B_3_seq3.meta.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto back = load_bank(dir);
  EXPECT_EQ(back.graph, built.bank.graph);
  EXPECT_EQ(back.version_count(), built.bank.version_count());
  for (const auto& [f, e] : built.bank.entries()) {
    const auto& other = back.entry(f);
    ASSERT_EQ(other.versions.size(), e.versions.size());
    for (std::size_t i = 0; i < e.versions.size(); ++i) {
      EXPECT_EQ(other.versions[i].version->canvas, e.versions[i].version->canvas);
      EXPECT_EQ(other.versions[i].version->summary, e.versions[i].version->summary);
      EXPECT_EQ(other.versions[i].metadata, e.versions[i].metadata);
      EXPECT_EQ(other.versions[i].visual, e.versions[i].visual);
    }
  }
  // Saving again over an existing bank replaces it.
  save_bank(back, dir);
  EXPECT_EQ(load_bank(dir).version_count(), built.bank.version_count());
  std::filesystem::remove_all(dir.parent_path());
}
