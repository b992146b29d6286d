#include "groundmem/memory.hpp"

#include <algorithm>

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

std::string_view to_string(Channel c) noexcept { return c == Channel::Visual ? "visual" : "textual"; }

std::string metadata_text(const ArtifactVersion& v, std::string_view label) {
  std::string t = text::trimmed(v.metadata);
  if (t.empty()) t = text::trimmed(label);
  if (t.empty()) t = "scene";
  return t;
}

void MemoryBank::allocate(const FrameId& frame, std::string label) {
  const FrameId f = frame.frame();
  if (frames_.contains(f)) fail(ErrorCode::PreconditionViolation, to_string(f) + " is already allocated");
  frames_[f] = FrameEntry{f, std::move(label), {}};
  graph.add_frame(f);
}

void MemoryBank::insert(ArtifactVersion version, Gateway& gateway) {
  const FrameId f = version.frame_id.frame();
  const auto it = frames_.find(f);
  if (it == frames_.end()) fail(ErrorCode::UnallocatedFrame, "no allocated frame for " + to_string(version.frame_id));
  StoredVersion s;
  if (version.canvas) s.visual = gateway.embed_image(*version.canvas);
  s.metadata = gateway.embed_text(metadata_text(version, it->second.label));
  if (version.summary) s.summary = gateway.embed_text(*version.summary);
  s.version = std::make_shared<const ArtifactVersion>(std::move(version));
  insert_cached(std::move(s));
}

void MemoryBank::insert_cached(StoredVersion stored) {
  if (!stored.version) fail(ErrorCode::PreconditionViolation, "null version");
  const FrameId id = stored.version->frame_id;
  const auto it = frames_.find(id.frame());
  if (it == frames_.end()) fail(ErrorCode::UnallocatedFrame, "no allocated frame for " + to_string(id));
  const int expected = static_cast<int>(it->second.versions.size()) + 1;
  if (id.sequence != expected)
    fail(ErrorCode::PreconditionViolation,
         to_string(id) + " out of order; expected sequence " + std::to_string(expected));
  if (!stored.version->canvas && !stored.version->summary)
    fail(ErrorCode::PreconditionViolation, to_string(id) + " has neither canvas nor summary");
  it->second.versions.push_back(std::move(stored));
}

const FrameEntry& MemoryBank::entry(const FrameId& frame) const {
  const auto it = frames_.find(frame.frame());
  if (it == frames_.end()) fail(ErrorCode::UnknownFrame, "no frame " + to_string(frame));
  return it->second;
}

std::shared_ptr<const ArtifactVersion> MemoryBank::latest(const FrameId& frame) const {
  const auto& e = entry(frame);
  return e.versions.empty() ? nullptr : e.versions.back().version;
}

std::vector<std::string> MemoryBank::prompt_history(const FrameId& frame) const {
  std::vector<std::string> out;
  for (const auto& v : entry(frame).versions) out.push_back(v.version->prompt);
  return out;
}

std::vector<std::string> MemoryBank::label_table(Speaker speaker) const {
  std::vector<std::string> out;
  for (const auto& [f, e] : frames_) {
    if (f.speaker == speaker) out.push_back(to_string(f) + ": " + (e.label.empty() ? std::string("scene") : e.label));
  }
  return out;
}

std::size_t MemoryBank::version_count() const {
  std::size_t n = 0;
  for (const auto& [f, e] : frames_) n += e.versions.size();
  return n;
}

// Scoring ---------------------------------------------------------------------------

double score_visual(const StoredVersion& v, const Embedding& query, double lambda) {
  if (!v.visual) fail(ErrorCode::MissingCanvas, to_string(v.version->frame_id) + " has no canvas");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorCode::PreconditionViolation, "lambda outside [0, 1]");
  return hybrid_score(cosine(*v.visual, query), cosine(v.metadata, query), lambda);
}

double score_visual(const StoredVersion& v, std::string_view query, double lambda, Gateway& gateway) {
  return score_visual(v, gateway.embed_text(query), lambda);
}

double score_textual(const StoredVersion& v, const Embedding& query) {
  if (!v.summary) fail(ErrorCode::PreconditionViolation, to_string(v.version->frame_id) + " has no summary");
  return cosine(*v.summary, query);
}

std::vector<ScoredHit> retrieve(const MemoryBank& bank, const Embedding& query, int n, Pov pov,
                                const RetrievalOptions& options) {
  if (n < 1) fail(ErrorCode::PreconditionViolation, "retrieval count must be positive");
  std::vector<ScoredHit> hits;
  bool any = false;
  for (const auto& [f, e] : bank.entries()) {
    if (!pov_admits(pov, f.speaker) || e.versions.empty()) continue;
    any = true;
    const auto& s = e.latest();
    std::optional<ScoredHit> visual, textual;
    if (has_visual(options.condition) && s.visual)
      visual = ScoredHit{f, score_visual(s, query, options.lambda), Channel::Visual, s.version};
    if (has_textual(options.condition) && s.summary)
      textual = ScoredHit{f, score_textual(s, query), Channel::Textual, s.version};
    if (options.condition == Condition::Both && !options.union_fusion) {
      if (visual && textual) {
        hits.push_back(textual->score > visual->score ? *textual : *visual);
        continue;
      }
    }
    if (visual) hits.push_back(*visual);
    if (textual) hits.push_back(*textual);
  }
  if (!any) fail(ErrorCode::EmptyBank, std::string("no frames visible to POV ") + std::string(to_string(pov)));
  std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
    return a.channel < b.channel;
  });
  if (hits.size() > static_cast<std::size_t>(n)) hits.resize(static_cast<std::size_t>(n));
  return hits;
}

std::vector<ScoredHit> retrieve(const MemoryBank& bank, std::string_view query, int n, Pov pov,
                                const RetrievalOptions& options, Gateway& gateway) {
  return retrieve(bank, gateway.embed_text(query), n, pov, options);
}

std::vector<EvidenceItem> assemble_evidence(const MemoryBank& bank, const std::vector<ScoredHit>& hits) {
  std::vector<EvidenceItem> out;
  for (const auto& h : hits) {
    out.push_back({h, bank.latest(h.frame_id)->metadata, bank.graph.triplets_for({h.frame_id})});
    out.back().hit.version = bank.latest(h.frame_id);
  }
  return out;
}

}  // namespace groundmem
