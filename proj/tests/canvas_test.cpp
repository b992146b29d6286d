#include <gtest/gtest.h>

#include "groundmem/canvas.hpp"
#include "groundmem/error.hpp"
#include "support.hpp"

using namespace groundmem;

namespace {

Canvas sample() {
  Canvas c = Canvas::blank(8, 6);
  c.at(1, 1) = {254, 254, 253};
  c.at(2, 3) = {128, 0, 0};
  c.at(5, 7) = {10, 5, 0};
  c.scene = "kitchen";
  c.objects.push_back({"fridge", Outline::Black, {0, 0, 3, 3}, {"white"}});
  c.objects.push_back({"sink", Outline::Blue, {2, 4, 5, 7}, {}});
  return c;
}

}  // namespace

TEST(Normalize, SnapsNearPaletteColors) {
  const auto n = normalize_canvas(sample(), default_palette(), 16.0);
  EXPECT_EQ(n.at(1, 1), kWhite);
  EXPECT_EQ(n.at(2, 3), (Rgb{128, 0, 0}));
  EXPECT_EQ(n.at(5, 7), kBlack);
  EXPECT_EQ(n.objects, sample().objects);
}

TEST(Normalize, BoundaryIsInclusive) {
  Canvas c = Canvas::blank(2, 1);
  c.at(0, 0) = {255, 255, 239};  // distance exactly 16
  c.at(0, 1) = {255, 255, 238};
  const auto n = normalize_canvas(c, default_palette(), 16.0);
  EXPECT_EQ(n.at(0, 0), kWhite);
  EXPECT_EQ(n.at(0, 1), (Rgb{255, 255, 238}));
}

TEST(Png, RoundTripsPixels) {
  const Canvas c = sample();
  const auto back = decode_png(encode_png(c));
  EXPECT_EQ(back.width, c.width);
  EXPECT_EQ(back.height, c.height);
  EXPECT_EQ(back.pixels, c.pixels);
}

TEST(Png, RejectsGarbage) {
  try {
    decode_png({1, 2, 3, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DecodeError);
  }
}

TEST(Sidecar, SaveLoadRoundTrip) {
  const auto dir = fixture::scratch_dir("canvas");
  const Canvas c = sample();
  save_canvas(c, dir, "B_2_seq3");
  EXPECT_TRUE(std::filesystem::exists(dir / "B_2_seq3.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "B_2_seq3.objects.json"));
  EXPECT_EQ(load_canvas(dir, "B_2_seq3"), c);
  std::filesystem::remove_all(dir);
}

TEST(Registry, DescribesObjectsByStatus) {
  const auto text = describe_registry(sample());
  EXPECT_LT(text.find("fridge"), text.find("sink"));
}
