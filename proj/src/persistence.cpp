#include "groundmem/persistence.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "groundmem/canvas.hpp"
#include "groundmem/error.hpp"
#include "groundmem/json_extract.hpp"

namespace groundmem {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "embeddings.bin is written in host byte order");

namespace {

constexpr const char* kFormat = "groundmem-bank/1";

std::string temp_suffix() { return ".tmp" + std::to_string(::getpid()); }

void write_plain(const fs::path& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot write " + path.string());
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) fail(ErrorCode::IoError, "short write to " + path.string());
}

Json span_json(std::size_t offset, Eigen::Index n) { return Json::array({offset, n}); }

struct BlobWriter {
  std::string bytes;
  Json put(const Embedding& e) {
    const std::size_t offset = bytes.size() / sizeof(double);
    bytes.append(reinterpret_cast<const char*>(e.data()), static_cast<std::size_t>(e.size()) * sizeof(double));
    return span_json(offset, e.size());
  }
};

Embedding take(const std::string& blob, const Json& span, const std::string& where) {
  if (!span.is_array() || span.size() != 2 || !span[0].is_number_unsigned() || !span[1].is_number_unsigned())
    fail(ErrorCode::FormatError, where + ": bad embedding span");
  const auto offset = span[0].get<std::size_t>();
  const auto n = span[1].get<std::size_t>();
  if ((offset + n) * sizeof(double) > blob.size()) fail(ErrorCode::FormatError, where + ": embedding span past end");
  Embedding e(static_cast<Eigen::Index>(n));
  std::memcpy(e.data(), blob.data() + offset * sizeof(double), n * sizeof(double));
  return e;
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += temp_suffix();
  write_plain(tmp, contents);
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void save_bank(const MemoryBank& bank, const fs::path& dir) {
  std::error_code ec;
  const fs::path target = fs::absolute(dir);
  fs::path tmp = target;
  tmp += temp_suffix();
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp / "frames", ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + tmp.string() + ": " + ec.message());

  BlobWriter blob;
  Json frames = Json::array();
  for (const auto& [f, e] : bank.entries()) {
    Json versions = Json::array();
    for (const auto& s : e.versions) {
      const auto& v = *s.version;
      const std::string id = to_string(v.frame_id);
      Json emb = {{"metadata", blob.put(s.metadata)}, {"visual", nullptr}, {"summary", nullptr}};
      if (s.visual) emb["visual"] = blob.put(*s.visual);
      if (s.summary) emb["summary"] = blob.put(*s.summary);
      if (v.canvas) save_canvas(*v.canvas, tmp / "frames", id);
      if (v.summary) write_plain(tmp / "frames" / (id + ".summary.txt"), *v.summary);
      write_plain(tmp / "frames" / (id + ".meta.txt"), v.metadata);
      versions.push_back({{"id", id},
                          {"created_at_turn", v.created_at_turn},
                          {"prompt", v.prompt},
                          {"phi", v.phi ? Json(*v.phi) : Json(nullptr)},
                          {"canvas", v.canvas.has_value()},
                          {"summary", v.summary.has_value()},
                          {"embeddings", emb}});
    }
    frames.push_back({{"frame", to_string(f)}, {"label", e.label}, {"versions", versions}});
  }
  const Json manifest = {{"format", kFormat},
                         {"dialogue_id", bank.dialogue_id},
                         {"condition", std::string(to_string(bank.condition))},
                         {"frames", frames}};
  write_plain(tmp / "manifest.json", manifest.dump(2) + "\n");
  write_plain(tmp / "links.jsonl", to_jsonl(bank.graph.triplets()));
  write_plain(tmp / "embeddings.bin", blob.bytes);

  fs::path old = target;
  old += ".old" + temp_suffix();
  const bool existed = fs::exists(target);
  if (existed) fs::rename(target, old, ec);
  if (ec) fail(ErrorCode::IoError, "cannot replace " + target.string() + ": " + ec.message());
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::IoError, "cannot move bank into " + target.string() + ": " + ec.message());
  if (existed) fs::remove_all(old, ec);
}

MemoryBank load_bank(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) fail(ErrorCode::IoError, "no bank at " + dir.string() + " (manifest.json missing)");
  const Json m = Json::parse(read_file(manifest_path), nullptr, false);
  if (!m.is_object() || m.value("format", "") != std::string(kFormat) || !m.contains("frames") || !m["frames"].is_array())
    fail(ErrorCode::FormatError, manifest_path.string() + ": not a bank manifest");
  const std::string blob = read_file(dir / "embeddings.bin");

  MemoryBank bank;
  bank.dialogue_id = m.value("dialogue_id", "");
  const auto cond = parse_condition(m.value("condition", ""));
  if (!cond) fail(ErrorCode::FormatError, manifest_path.string() + ": unknown condition");
  bank.condition = *cond;

  try {
    for (const auto& fj : m["frames"]) {
      const FrameId f = parse_frame_id(fj.at("frame").get<std::string>());
      bank.allocate(f, fj.at("label").get<std::string>());
      for (const auto& vj : fj.at("versions")) {
        const std::string id = vj.at("id").get<std::string>();
        ArtifactVersion v;
        v.frame_id = parse_frame_id(id);
        v.created_at_turn = vj.at("created_at_turn").get<int>();
        v.prompt = vj.at("prompt").get<std::string>();
        if (!vj.at("phi").is_null()) v.phi = vj["phi"].get<double>();
        if (vj.at("canvas").get<bool>()) v.canvas = load_canvas(dir / "frames", id);
        if (vj.at("summary").get<bool>()) v.summary = read_file(dir / "frames" / (id + ".summary.txt"));
        v.metadata = read_file(dir / "frames" / (id + ".meta.txt"));
        const auto& ej = vj.at("embeddings");
        StoredVersion s;
        s.metadata = take(blob, ej.at("metadata"), id);
        if (!ej.at("visual").is_null()) s.visual = take(blob, ej["visual"], id);
        if (!ej.at("summary").is_null()) s.summary = take(blob, ej["summary"], id);
        s.version = std::make_shared<const ArtifactVersion>(std::move(v));
        bank.insert_cached(std::move(s));
      }
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, manifest_path.string() + ": " + e.what());
  }
  for (const auto& t : triplets_from_jsonl(read_file(dir / "links.jsonl"))) bank.graph.insert(t);
  return bank;
}

}  // namespace groundmem
