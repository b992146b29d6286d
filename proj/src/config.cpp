#include "groundmem/config.hpp"

#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"backend",
     {"mode", "seed", "chat_url", "image_url", "embed_url", "timeout_ms", "max_retries", "max_in_flight", "dropout",
      "canvas_size"}},
    {"constructor", {"candidates", "tolerance", "max_assumed"}},
    {"observer", {"parse_retries"}},
    {"memory", {"lambda", "fusion"}},
    {"reasoner", {"max_steps", "abstain", "indirect_request_rule"}},
    {"run", {"condition", "jobs"}},
};

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_error&) {
    fail(ErrorCode::ConfigError, "bad value for " + key + ": " + *v);
  }
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  const auto l = text::lower(text::trim(*v));
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  fail(ErrorCode::ConfigError, "bad boolean for " + key + ": " + *v);
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::ConfigError, what);
}

}  // namespace

void AppConfig::sync() {
  build.condition = run.condition;
  reasoner.condition = run.condition;
}

BenchmarkConfig AppConfig::benchmark() const {
  BenchmarkConfig b;
  b.run = run;
  b.build = build;
  b.reasoner = reasoner;
  b.jobs = jobs;
  return b;
}

AppConfig load_config_file(const std::filesystem::path& path, AppConfig c) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::ConfigError, std::string("cannot read config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto known = kKnownKeys.find(section);
    require(known != kKnownKeys.end(), "unknown config section [" + section + "]");
    for (const auto& [key, _] : body) {
      require(known->second.count(key) > 0, "unknown config key " + section + "." + key);
    }
  }

  auto& b = c.backend;
  if (auto m = tree.get_optional<std::string>("backend.mode")) {
    const auto l = text::lower(text::trim(*m));
    require(l == "mock" || l == "live", "backend.mode must be mock or live");
    b.mode = l == "live" ? Mode::Live : Mode::Mock;
  }
  b.seed = get<std::uint64_t>(tree, "backend.seed", b.seed);
  b.chat_url = get<std::string>(tree, "backend.chat_url", b.chat_url);
  b.image_url = get<std::string>(tree, "backend.image_url", b.image_url);
  b.embed_url = get<std::string>(tree, "backend.embed_url", b.embed_url);
  b.timeout_ms = get<int>(tree, "backend.timeout_ms", b.timeout_ms);
  b.max_retries = get<int>(tree, "backend.max_retries", b.max_retries);
  b.max_in_flight = get<int>(tree, "backend.max_in_flight", b.max_in_flight);
  b.dropout = get<double>(tree, "backend.dropout", b.dropout);
  b.canvas_size = get<int>(tree, "backend.canvas_size", b.canvas_size);
  require(b.timeout_ms > 0 && b.max_retries >= 0 && b.max_in_flight > 0, "backend limits must be positive");
  require(b.dropout >= 0.0 && b.dropout <= 1.0, "backend.dropout must lie in [0, 1]");
  require(b.canvas_size >= 16, "backend.canvas_size too small");

  auto& k = c.build.constructor;
  k.candidates = get<int>(tree, "constructor.candidates", k.candidates);
  k.tolerance = get<double>(tree, "constructor.tolerance", k.tolerance);
  k.max_assumed = get<int>(tree, "constructor.max_assumed", k.max_assumed);
  require(k.candidates >= 1, "constructor.candidates must be at least 1");
  require(k.tolerance >= 0.0 && k.max_assumed >= 0, "constructor values must be non-negative");

  c.build.parse_retries = get<int>(tree, "observer.parse_retries", c.build.parse_retries);
  require(c.build.parse_retries >= 0, "observer.parse_retries must be non-negative");

  auto& r = c.reasoner;
  r.lambda = get<double>(tree, "memory.lambda", r.lambda);
  require(r.lambda >= 0.0 && r.lambda <= 1.0, "memory.lambda must lie in [0, 1]");
  if (auto f = tree.get_optional<std::string>("memory.fusion")) {
    const auto l = text::lower(text::trim(*f));
    require(l == "max" || l == "union", "memory.fusion must be max or union");
    r.union_fusion = l == "union";
  }
  r.max_steps = get<int>(tree, "reasoner.max_steps", r.max_steps);
  require(r.max_steps >= 1, "reasoner.max_steps must be at least 1");
  r.abstain = get<std::string>(tree, "reasoner.abstain", r.abstain);
  r.indirect_request_rule = get_bool(tree, "reasoner.indirect_request_rule", r.indirect_request_rule);

  if (auto s = tree.get_optional<std::string>("run.condition")) {
    auto rc = parse_run_condition(*s);
    require(rc.has_value(), "run.condition must be image, text, both or full-dialog");
    c.run = *rc;
  }
  c.jobs = get<int>(tree, "run.jobs", c.jobs);
  require(c.jobs >= 1, "run.jobs must be at least 1");
  c.sync();
  return c;
}

AppConfig load_config(const std::optional<std::filesystem::path>& path) {
  AppConfig c;
  if (path) {
    if (!std::filesystem::exists(*path)) fail(ErrorCode::ConfigError, "config file not found: " + path->string());
    c = load_config_file(*path, c);
  }
  c.backend = apply_environment(c.backend);
  c.sync();
  return c;
}

}  // namespace groundmem
