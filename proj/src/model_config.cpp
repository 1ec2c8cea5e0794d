#include "ddan/model.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace ddan {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
}

ModelConfig preset_config(const std::string& name) {
  ModelConfig c;  // canonical defaults: 5x5, C=32, 4 ABs, ratios 2
  if (name == "canonical_5x5_x2") {
    return c;
  } else if (name == "canonical_5x5_x4") {
    c.scale = 4;
    return c;
  } else if (name == "canonical_9x9_x2") {
    c.angular_u = c.angular_v = 9;
    return c;
  } else if (name == "canonical_9x9_x4") {
    c.angular_u = c.angular_v = 9;
    c.scale = 4;
    return c;
  } else if (name == "tiny_3x3_x2") {
    c.angular_u = c.angular_v = 3;
    c.channels = 4;
    c.n_blocks = 1;
    return c;
  } else if (name == "desk_5x5_x2") {
    c.channels = 16;
    c.n_blocks = 2;
    return c;
  }
  throw std::invalid_argument("unknown config preset: " + name);
}

}  // namespace

std::vector<std::string> model_config_presets() {
  return {"canonical_5x5_x2", "canonical_5x5_x4", "canonical_9x9_x2",
          "canonical_9x9_x4", "tiny_3x3_x2",      "desk_5x5_x2"};
}

std::string write_model_config(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "scale=" << cfg.scale << "\n";
  os << "angular_u=" << cfg.angular_u << "\n";
  os << "angular_v=" << cfg.angular_v << "\n";
  os << "channels=" << cfg.channels << "\n";
  os << "n_blocks=" << cfg.n_blocks << "\n";
  os << "ratio_view=" << cfg.ratio_view << "\n";
  os << "ratio_channel=" << cfg.ratio_channel << "\n";
  os << "use_aspp=" << (cfg.use_aspp ? 1 : 0) << "\n";
  os << "use_va=" << (cfg.use_va ? 1 : 0) << "\n";
  os << "use_ca=" << (cfg.use_ca ? 1 : 0) << "\n";
  os << "structure=" << (cfg.structure == Structure::dual_branch ? "dual_branch" : "cascaded")
     << "\n";
  return os.str();
}

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got: " + t);
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key == "scale")
      cfg.scale = parse_int(val, key);
    else if (key == "angular_u")
      cfg.angular_u = parse_int(val, key);
    else if (key == "angular_v")
      cfg.angular_v = parse_int(val, key);
    else if (key == "channels")
      cfg.channels = parse_int(val, key);
    else if (key == "n_blocks")
      cfg.n_blocks = parse_int(val, key);
    else if (key == "ratio_view")
      cfg.ratio_view = parse_int(val, key);
    else if (key == "ratio_channel")
      cfg.ratio_channel = parse_int(val, key);
    else if (key == "use_aspp")
      cfg.use_aspp = parse_bool(val, key);
    else if (key == "use_va")
      cfg.use_va = parse_bool(val, key);
    else if (key == "use_ca")
      cfg.use_ca = parse_bool(val, key);
    else if (key == "structure") {
      if (val == "dual_branch")
        cfg.structure = Structure::dual_branch;
      else if (val == "cascaded")
        cfg.structure = Structure::cascaded;
      else
        throw std::invalid_argument("config: bad structure: " + val);
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ModelConfig load_model_config(const std::string& path_or_preset) {
  if (!std::filesystem::exists(path_or_preset)) {
    for (const auto& p : model_config_presets())
      if (p == path_or_preset) return preset_config(p);
    throw std::runtime_error("config not found (no such file or preset): " + path_or_preset);
  }
  std::ifstream f(path_or_preset);
  if (!f) throw std::runtime_error("cannot open config: " + path_or_preset);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model_config(ss.str());
}

}  // namespace ddan
