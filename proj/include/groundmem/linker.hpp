#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/gateway.hpp"

namespace groundmem {

inline constexpr std::string_view kPredicates[] = {"is_north_of", "is_south_of", "is_east_of", "is_west_of",
                                                   "is_next_to",  "is_same_as",  "is_revisit_of"};

/// Lower-cases, maps non-alphanumerics to '_', resolves aliases ("north_of").
/// Returns nothing for predicates outside the vocabulary.
std::optional<std::string> normalize_predicate(std::string_view raw);
/// is_north_of <-> is_south_of, is_east_of <-> is_west_of; symmetric
/// predicates are their own inverse; is_revisit_of has none.
std::optional<std::string> inverse_predicate(std::string_view canonical);

struct FrameContext {
  std::optional<FrameId> prev;
  std::optional<FrameId> curr;
  std::optional<FrameId> next;
};

struct LinkResult {
  std::vector<Triplet> triplets;
  std::vector<std::string> diagnostics;  // rejected candidates
};

/// `frame_meta_table` lines look like "B_2: kitchen". Candidates naming a
/// frame outside the context, an unknown predicate, or a self-loop are dropped.
LinkResult extract_links(const std::string& relation_hint, const std::vector<std::string>& context,
                         const FrameContext& frames, const std::vector<std::string>& frame_meta_table,
                         Gateway& gateway);

/// Triplets between known frames. Inverses are answered at query time.
class RelationGraph {
 public:
  void add_frame(const FrameId& frame);
  bool has_frame(const FrameId& frame) const;
  const std::set<FrameId>& frames() const { return frames_; }

  /// Idempotent. Throws UnknownFrame for unregistered endpoints and
  /// InvalidTriplet for self-loops or non-canonical predicates.
  void insert(const Triplet& t);

  /// Incident triplets in insertion order. With a predicate, stored triplets
  /// matching it plus inverted views of those whose inverse matches.
  /// Throws UnknownFrame.
  std::vector<Triplet> neighbors(const FrameId& frame, const std::optional<std::string>& predicate = std::nullopt) const;

  /// Union of triplets incident to any hit, sorted by (subject, predicate, object).
  std::vector<Triplet> triplets_for(const std::vector<FrameId>& hits) const;

  const std::vector<Triplet>& triplets() const { return triplets_; }
  std::size_t size() const { return triplets_.size(); }

  bool operator==(const RelationGraph&) const = default;

 private:
  std::set<FrameId> frames_;
  std::vector<Triplet> triplets_;  // insertion order
};

/// One `{"subject", "predicate", "object"}` object per line.
std::string to_jsonl(const std::vector<Triplet>& triplets);
/// Throws FormatError (with line number) or MalformedFrameId.
std::vector<Triplet> triplets_from_jsonl(std::string_view text);

}  // namespace groundmem
