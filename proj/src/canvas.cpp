#include "groundmem/canvas.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

std::vector<Rgb> default_palette() { return {kWhite, kBlack, kRed, kBlue}; }

Rgb outline_color(Outline o) noexcept {
  switch (o) {
    case Outline::Black: return kBlack;
    case Outline::Red: return kRed;
    case Outline::Blue: return kBlue;
  }
  return kBlack;
}

Canvas normalize_canvas(const Canvas& c, const std::vector<Rgb>& palette, double tolerance) {
  Canvas out = c;
  const double limit = tolerance * tolerance;
  for (auto& px : out.pixels) {
    long best = -1;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < palette.size(); ++i) {
      const long dr = long(px.r) - palette[i].r;
      const long dg = long(px.g) - palette[i].g;
      const long db = long(px.b) - palette[i].b;
      const long d = dr * dr + dg * dg + db * db;
      if (best < 0 || d < best) {
        best = d;
        best_i = i;
      }
    }
    if (best >= 0 && static_cast<double>(best) <= limit) px = palette[best_i];
  }
  return out;
}

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + length > cur->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(data, cur->bytes->data() + cur->pos, length);
  cur->pos += length;
}

void png_error_throw(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
  if (slot) *slot = msg;
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Canvas& c) {
  validate_canvas(c);
  std::vector<std::uint8_t> out;
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_throw, png_warning_ignore);
  if (!png) fail(ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(c.height));
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "PNG encode failed: " + err);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, c.width, c.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  static_assert(sizeof(Rgb) == 3);
  for (int y = 0; y < c.height; ++y)
    rows[y] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(&c.pixels[static_cast<std::size_t>(y) * c.width]));
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Canvas decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) fail(ErrorCode::DecodeError, "not a PNG image");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_throw, png_warning_ignore);
  if (!png) fail(ErrorCode::DecodeError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{&bytes, 0};
  Canvas c;
  std::vector<png_bytep> rows;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "PNG decode failed: " + err);
  }
  png_set_read_fn(png, &cursor, png_read_from_vector);
  png_read_info(png, info);
  const auto color_type = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (png_get_bit_depth(png, info) < 8) png_set_expand(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) png_error(png, "unexpected row layout");
  c = Canvas::blank(w, h);
  rows.resize(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = reinterpret_cast<png_bytep>(&c.pixels[static_cast<std::size_t>(y) * w]);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return c;
}

Json sidecar_json(const Canvas& c) {
  Json objects = Json::array();
  for (const auto& o : c.objects) {
    objects.push_back({{"name", o.name},
                       {"outline", std::string(to_string(o.outline))},
                       {"box", {o.box.ymin, o.box.xmin, o.box.ymax, o.box.xmax}},
                       {"attributes", o.attributes}});
  }
  return {{"width", c.width}, {"height", c.height}, {"scene", c.scene}, {"objects", objects}};
}

void apply_sidecar(Canvas& c, const Json& sidecar) {
  try {
    c.scene = sidecar.value("scene", std::string());
    c.objects.clear();
    for (const auto& o : sidecar.at("objects")) {
      CanvasObject obj;
      obj.name = o.at("name").get<std::string>();
      const auto outline = parse_outline(o.at("outline").get<std::string>());
      if (!outline) fail(ErrorCode::DecodeError, "unknown outline in sidecar");
      obj.outline = *outline;
      const auto& b = o.at("box");
      obj.box = Box{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
      obj.attributes = o.value("attributes", std::vector<std::string>{});
      c.objects.push_back(std::move(obj));
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::DecodeError, std::string("malformed canvas sidecar: ") + e.what());
  }
}

namespace {

void write_file(const std::filesystem::path& p, const void* data, std::size_t n) {
  std::ofstream f(p, std::ios::binary);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!f) fail(ErrorCode::IoError, "cannot write " + p.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

void save_canvas(const Canvas& c, const std::filesystem::path& dir, const std::string& stem) {
  const auto png = encode_png(c);
  write_file(dir / (stem + ".png"), png.data(), png.size());
  const std::string side = sidecar_json(c).dump(2) + "\n";
  write_file(dir / (stem + ".objects.json"), side.data(), side.size());
}

Canvas load_canvas(const std::filesystem::path& dir, const std::string& stem) {
  Canvas c = decode_png(read_file(dir / (stem + ".png")));
  const auto side = read_file(dir / (stem + ".objects.json"));
  const auto doc = Json::parse(side.begin(), side.end(), nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::DecodeError, "sidecar for " + stem + " is not JSON");
  apply_sidecar(c, doc);
  validate_canvas(c);
  return c;
}

std::string describe_registry(const Canvas& c) {
  std::string out;
  for (Outline level : {Outline::Black, Outline::Red, Outline::Blue}) {
    for (const auto& o : c.objects) {
      if (o.outline != level) continue;
      out += "- " + o.name + " (" + std::string(to_string(o.outline)) + ")";
      if (level != Outline::Blue && !o.attributes.empty()) out += ": " + text::join(o.attributes, ", ");
      out += "\n";
    }
  }
  return out;
}

}  // namespace groundmem
