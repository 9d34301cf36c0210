#include "ifbs_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace ifbs::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw UsageError("config line " + std::to_string(line) + ": " + msg);
}

double to_real(int line, const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail(line, key + ": expected a number, got '" + v + "'");
  return out;
}

std::int64_t to_int(int line, const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail(line, key + ": expected an integer, got '" + v + "'");
  return out;
}

std::int64_t to_nonneg(int line, const std::string& key, const std::string& v) {
  const auto x = to_int(line, key, v);
  if (x < 0) fail(line, key + " must be nonnegative");
  return x;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return s != "." && s != "..";
}

}  // namespace

std::int64_t ExperimentConfig::effective_stride(Index n) const {
  if (stride) return *stride;
  return n <= 500 ? 1 : 10;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::set<std::string> seen_global;
  std::set<std::string> seen_block;
  AlgorithmConfig* current = nullptr;
  auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text != "[algorithm]") fail(line, "unknown section " + text);
      cfg.algorithms.emplace_back();
      current = &cfg.algorithms.back();
      seen_block.clear();
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line, "empty key or value");
    auto& seen = current ? seen_block : seen_global;
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");

    if (current == nullptr) {
      if (key == "instance") cfg.instance = resolve(value);
      else if (key == "a_csv") cfg.a_csv = resolve(value);
      else if (key == "b_csv") cfg.b_csv = resolve(value);
      else if (key == "m") cfg.generate.m = to_nonneg(line, key, value);
      else if (key == "n") cfg.generate.n = to_nonneg(line, key, value);
      else if (key == "sparsity") cfg.generate.sparsity = to_nonneg(line, key, value);
      else if (key == "std") cfg.generate.entry_std = to_real(line, key, value);
      else if (key == "rho") cfg.generate.rho = to_real(line, key, value);
      else if (key == "seed") {
        cfg.generate.seed = static_cast<std::uint64_t>(to_nonneg(line, key, value));
        cfg.has_seed = true;
      } else if (key == "gap_tol") cfg.gap_tol = to_real(line, key, value);
      else if (key == "output") cfg.output = resolve(value);
      else if (key == "stride") cfg.stride = to_nonneg(line, key, value);
      else if (key == "e_threshold") cfg.e_threshold = to_real(line, key, value);
      else fail(line, "unknown key '" + key + "'");
    } else {
      if (key == "name") current->name = value;
      else if (key == "algo") {
        if (value == "ifbs") current->algorithm = Algorithm::IFBS;
        else if (value == "sipm") current->algorithm = Algorithm::SIPM;
        else fail(line, "algo must be ifbs or sipm");
      } else if (key == "schedule") current->schedule = value;
      else if (key == "step") current->step = value;
      else if (key == "max_iter") current->max_iter = to_nonneg(line, key, value);
      else if (key == "target_gap") current->target_gap = to_real(line, key, value);
      else if (key == "step_tol") current->step_tol = to_real(line, key, value);
      else if (key == "restart_test") {
        if (value == "inner-product") current->restart_test = RestartTest::InnerProduct;
        else if (value == "objective") current->restart_test = RestartTest::ObjectiveIncrease;
        else fail(line, "restart_test must be inner-product or objective");
      } else fail(line, "unknown algorithm key '" + key + "'");
    }
  }

  if (!seen_global.contains("output")) cfg.output = resolve(cfg.output.string());

  const int sources = (cfg.instance ? 1 : 0) + (cfg.a_csv || cfg.b_csv ? 1 : 0) +
                      (cfg.has_seed ? 1 : 0);
  if (sources == 0) throw UsageError("config: no instance source (instance, a_csv/b_csv, or seed)");
  if (sources > 1) throw UsageError("config: more than one instance source");
  if ((cfg.a_csv != std::nullopt) != (cfg.b_csv != std::nullopt)) {
    throw UsageError("config: a_csv and b_csv must be given together");
  }
  if (!(cfg.gap_tol > 0.0)) throw UsageError("config: gap_tol must be positive");
  if (!(cfg.e_threshold > 0.0)) throw UsageError("config: e_threshold must be positive");
  if (cfg.algorithms.empty()) throw UsageError("config: no [algorithm] blocks");

  std::set<std::string> names;
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
    auto& a = cfg.algorithms[i];
    if (a.name.empty()) a.name = "alg" + std::to_string(i + 1);
    if (!valid_name(a.name)) throw UsageError("config: algorithm name '" + a.name + "' is not file-safe");
    if (!names.insert(a.name).second) throw UsageError("config: duplicate algorithm name '" + a.name + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace ifbs::cli
