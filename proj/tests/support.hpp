#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <sys/wait.h>

#include "groundmem/evaluation.hpp"
#include "groundmem/gateway.hpp"

namespace groundmem::fixture {

inline std::filesystem::path data_dir() { return GROUNDMEM_TEST_DATA; }
inline std::string cli_path() { return GROUNDMEM_CLI; }

inline std::unique_ptr<Gateway> mock(std::uint64_t seed = 7) {
  BackendConfig c;
  c.seed = seed;
  return make_mock_gateway(c);
}

inline Dialogue scenario(const std::string& id) {
  for (auto& d : load_transcripts(data_dir() / "scenarios.jsonl")) {
    if (d.id == id) return d;
  }
  throw std::runtime_error("no scenario " + id);
}

inline Dialogue truncated(Dialogue d, int last_turn) {
  std::erase_if(d.turns, [&](const Utterance& u) { return u.turn > last_turn; });
  return d;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("groundmem_" + name + "_" + std::to_string(rng() % 1000000007));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Runs a shell command and returns its exit status.
inline int run(const std::string& command) {
  const int raw = std::system((command + " >/dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

/// Runs a shell command and returns its stdout; stderr is discarded.
inline std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) return out;
  std::array<char, 4096> buf;
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  pclose(pipe);
  return out;
}

}  // namespace groundmem::fixture
