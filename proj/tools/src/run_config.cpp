#include "run_config.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "json.hpp"
#include "modechoice/errors.hpp"
#include "modechoice/report.hpp"

namespace modechoice::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_file(const std::optional<fs::path>& path, std::string_view what) {
  if (!path) throw InputError(fmt::format("missing {} path", what));
  std::error_code ec;
  if (!fs::is_regular_file(*path, ec)) {
    throw InputError(fmt::format("{} file {} does not exist", what, path->string()));
  }
}

RunConfig load_run_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("malformed config JSON at byte {}", e.byte));
  }
  if (!doc.is_object()) throw InputError("config must be a JSON object");

  RunConfig cfg;
  const fs::path base = path.parent_path();
  const auto path_field = [&](const char* key) -> std::optional<fs::path> {
    const auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_string()) throw InputError(fmt::format("config: '{}' must be a string", key));
    fs::path p = it->get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  for (const auto& [key, value] : doc.items()) {
    static constexpr std::string_view kKnown[] = {"trips",  "weather", "observations",
                                                  "spec",   "result",  "out",
                                                  "options", "max_gap_minutes", "stepwise"};
    bool known = false;
    for (auto k : kKnown) known = known || k == key;
    if (!known) throw InputError(fmt::format("config: unknown field '{}'", key));
  }
  cfg.trips = path_field("trips");
  cfg.weather = path_field("weather");
  cfg.observations = path_field("observations");
  cfg.spec = path_field("spec");
  cfg.result = path_field("result");
  cfg.out = path_field("out");
  if (auto it = doc.find("options"); it != doc.end()) cfg.options = options_from_json(*it);
  if (auto it = doc.find("max_gap_minutes"); it != doc.end()) {
    if (!it->is_number() || it->get<double>() < 0.0) {
      throw InputError("config: 'max_gap_minutes' must be a non-negative number");
    }
    cfg.max_gap_minutes = it->get<double>();
  }
  if (auto it = doc.find("stepwise"); it != doc.end()) {
    if (!it->is_boolean()) throw InputError("config: 'stepwise' must be true or false");
    cfg.stepwise = it->get<bool>();
  }
  return cfg;
}

void OutputSet::add(std::string name, std::string content) {
  files_[std::move(name)] = std::move(content);
}

void check_output_dir(const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw InputError(fmt::format("{} is not a directory", dir.string()));
    return;
  }
  // The nearest existing ancestor must be a directory.
  fs::path p = fs::absolute(dir, ec);
  while (!p.empty() && !fs::exists(p, ec)) {
    if (p == p.parent_path()) break;
    p = p.parent_path();
  }
  if (!fs::is_directory(p, ec)) throw InputError(fmt::format("cannot create output directory {}", dir.string()));
}

void OutputSet::commit(const fs::path& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, content] : files_) {
      const fs::path target = dir / name;
      fs::path tmp = target;
      tmp += ".tmp";
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      os << content;
      os.close();
      if (!os) throw InputError(fmt::format("failed writing {}", tmp.string()));
      staged.emplace_back(tmp, target);
    }
  } catch (...) {
    for (const auto& [tmp, target] : staged) fs::remove(tmp, ec);
    throw;
  }
  for (const auto& [tmp, target] : staged) fs::rename(tmp, target);
}

}  // namespace modechoice::cli
