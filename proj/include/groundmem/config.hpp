#pragma once

#include <filesystem>
#include <optional>

#include "groundmem/evaluation.hpp"
#include "groundmem/gateway.hpp"

namespace groundmem {

struct AppConfig {
  BackendConfig backend;
  BuildOptions build;
  ReasonerConfig reasoner;
  RunCondition run;
  int jobs = 1;

  /// Copies the run condition into the build and reasoner settings.
  void sync();
  BenchmarkConfig benchmark() const;
};

/// INI file over the defaults. Sections: backend, constructor, observer,
/// memory, reasoner, run. Unknown keys and bad values throw ConfigError.
AppConfig load_config_file(const std::filesystem::path& path, AppConfig base = {});

/// Defaults, then the optional INI file, then the environment.
AppConfig load_config(const std::optional<std::filesystem::path>& path);

}  // namespace groundmem
