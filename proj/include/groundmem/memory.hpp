#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/embedding.hpp"
#include "groundmem/gateway.hpp"
#include "groundmem/linker.hpp"

namespace groundmem {

enum class Channel : std::uint8_t { Visual, Textual };
std::string_view to_string(Channel c) noexcept;

/// One version with the embeddings cached at insert time.
struct StoredVersion {
  std::shared_ptr<const ArtifactVersion> version;
  std::optional<Embedding> visual;   // Psi_v(canvas)
  Embedding metadata;                // Psi_t(metadata)
  std::optional<Embedding> summary;  // Psi_t(summary)
};

struct FrameEntry {
  FrameId frame;
  std::string label;
  std::vector<StoredVersion> versions;  // versions[i] has sequence i + 1

  const StoredVersion& latest() const { return versions.back(); }
};

/// Text embedded for a version's metadata channel (never empty).
std::string metadata_text(const ArtifactVersion& v, std::string_view label);

class MemoryBank {
 public:
  std::string dialogue_id;
  Condition condition = Condition::Visual;
  RelationGraph graph;

  void allocate(const FrameId& frame, std::string label);
  bool allocated(const FrameId& frame) const { return frames_.contains(frame.frame()); }

  /// Embeds and stores a version. Throws UnallocatedFrame, or
  /// PreconditionViolation when the sequence number is not the next one.
  void insert(ArtifactVersion version, Gateway& gateway);
  /// Same, with embeddings supplied by the caller.
  void insert_cached(StoredVersion stored);

  const std::map<FrameId, FrameEntry>& entries() const { return frames_; }
  const FrameEntry& entry(const FrameId& frame) const;
  std::shared_ptr<const ArtifactVersion> latest(const FrameId& frame) const;
  /// Prompts of every stored version of the frame, oldest first.
  std::vector<std::string> prompt_history(const FrameId& frame) const;
  /// "B_2: kitchen" for each frame of the speaker.
  std::vector<std::string> label_table(Speaker speaker) const;
  std::size_t version_count() const;

 private:
  std::map<FrameId, FrameEntry> frames_;
};

struct ScoredHit {
  FrameId frame_id;  // the frame; the version carries the sequence
  double score = 0.0;
  Channel channel = Channel::Visual;
  std::shared_ptr<const ArtifactVersion> version;
};

struct RetrievalOptions {
  double lambda = 0.7;
  Condition condition = Condition::Visual;
  /// Both condition: rank each channel separately instead of taking the max per frame.
  bool union_fusion = false;
};

/// lambda * cos(visual, q) + (1 - lambda) * cos(metadata, q). Throws MissingCanvas.
double score_visual(const StoredVersion& v, const Embedding& query, double lambda);
double score_visual(const StoredVersion& v, std::string_view query, double lambda, Gateway& gateway);
/// cos(summary, q). Throws PreconditionViolation without a summary.
double score_textual(const StoredVersion& v, const Embedding& query);

/// Top `n` latest versions within `pov`. Ties go to the smaller frame id.
/// Throws EmptyBank when no frame passes the filter.
std::vector<ScoredHit> retrieve(const MemoryBank& bank, const Embedding& query, int n, Pov pov,
                                const RetrievalOptions& options);
std::vector<ScoredHit> retrieve(const MemoryBank& bank, std::string_view query, int n, Pov pov,
                                const RetrievalOptions& options, Gateway& gateway);

struct EvidenceItem {
  ScoredHit hit;
  std::string metadata;
  std::vector<Triplet> triplets;
};

std::vector<EvidenceItem> assemble_evidence(const MemoryBank& bank, const std::vector<ScoredHit>& hits);

}  // namespace groundmem
