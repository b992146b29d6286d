#pragma once

#include <string>

#include "groundmem/gateway.hpp"

// Rule-based stand-ins for the model roles, split across two translation units.
namespace groundmem::mock {

std::string observer(const ChatRequest& r);
std::string constructor(const ChatRequest& r);
std::string summarizer(const ChatRequest& r);
std::string fact_decomposer(const ChatRequest& r);
std::string captioner(const ChatRequest& r);
std::string fact_checker(const ChatRequest& r);
std::string linker(const ChatRequest& r);

std::string planner(const ChatRequest& r);
std::string refiner(const ChatRequest& r);
std::string processor(const ChatRequest& r);
std::string answerer(const ChatRequest& r);
std::string judge(const ChatRequest& r);
std::string annotator(const ChatRequest& r);

bool has_section(const std::string& body, const std::string& tag);

}  // namespace groundmem::mock
