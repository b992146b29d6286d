#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groundmem/gateway.hpp"

// Request builders for every model role. The user message is a sequence of
// `<tag>` sections; the mock suite reads the same sections back.
namespace groundmem::prompts {

ChatRequest observer(const std::vector<std::string>& context, const std::string& active_frame, char speaker,
                     const std::string& utterance);

ChatRequest constructor_creation(const std::string& delta, const std::string& frame_meta);
ChatRequest constructor_edit(const std::string& delta, const std::vector<std::string>& history,
                             std::shared_ptr<const Canvas> base);

ChatRequest summarizer(const std::string& delta, const std::optional<std::string>& previous,
                       const std::string& frame_meta);

ChatRequest fact_decomposer(const std::string& delta, const std::vector<std::string>& history);
ChatRequest captioner(std::shared_ptr<const Canvas> canvas);
ChatRequest fact_checker(const std::vector<std::string>& facts, const std::string& caption,
                         std::shared_ptr<const Canvas> canvas);

struct FrameSlots {
  std::string prev = "None";
  std::string curr = "None";
  std::string next = "None";
};
ChatRequest linker(const std::string& directive, const std::vector<std::string>& context, const FrameSlots& slots,
                   const std::vector<std::string>& frame_meta_table);

ChatRequest planner(const std::string& question, char asker, const std::string& feedback);
ChatRequest refiner(const std::string& question, const PlanStep& step);
ChatRequest processor(const std::string& instruction, const std::string& evidence, const std::string& scratch,
                      std::vector<std::shared_ptr<const Canvas>> attachments);
ChatRequest answerer(const std::string& question, char asker, const std::string& evidence, const std::string& scratch,
                     std::vector<std::shared_ptr<const Canvas>> attachments, bool state_content);
ChatRequest answerer_transcript(const std::string& question, char asker, const std::string& transcript);
ChatRequest judge(const std::string& question, const std::string& response, const std::string& gold);
ChatRequest annotator(const std::string& question, const std::string& gold);

}  // namespace groundmem::prompts
