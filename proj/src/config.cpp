#include "twoscale/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) {
    out.push_back(tok);
  }
  return out;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + s + "'", line);
  }
}

int to_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + s + "'", line);
  }
}

bool to_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + s + "'", line);
}

DataProfile parse_profile(const std::vector<std::string>& tok, int line) {
  if (tok.empty()) {
    throw ConfigError("empty profile", line);
  }
  if (tok[0] == "const" && tok.size() == 2) {
    return DataProfile::constant(to_double(tok[1], line));
  }
  if (tok[0] == "linear" && tok.size() == 5) {
    return DataProfile::linear(to_double(tok[1], line), to_double(tok[2], line),
                               to_double(tok[3], line), to_double(tok[4], line));
  }
  if (tok[0] == "bump" && tok.size() == 3) {
    return DataProfile::bump(to_double(tok[1], line), to_double(tok[2], line));
  }
  throw ConfigError(
      "bad profile '" + tok[0] +
          "'; expected 'const c', 'linear c0 cx cu cv' or 'bump c0 amp'",
      line);
}

TimeProfile parse_time_profile(const std::vector<std::string>& tok, int line) {
  if (tok.empty()) {
    throw ConfigError("empty time profile", line);
  }
  if (tok[0] == "const" && tok.size() == 2) {
    return TimeProfile::constant(to_double(tok[1], line));
  }
  if (tok[0] == "ramp" && tok.size() == 3) {
    return TimeProfile::ramp(to_double(tok[1], line), to_double(tok[2], line));
  }
  if (tok[0] == "exp" && tok.size() == 3) {
    return TimeProfile::exponential(to_double(tok[1], line), to_double(tok[2], line));
  }
  throw ConfigError("bad time profile '" + tok[0] +
                        "'; expected 'const v', 'ramp v0 slope' or 'exp v0 rate'",
                    line);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) {
    return "";
  }
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string profile_string(const DataProfile& p) {
  switch (p.kind) {
    case DataProfile::Kind::Constant:
      return "const " + format_double(p.c0);
    case DataProfile::Kind::Linear:
      return "linear " + format_double(p.c0) + " " + format_double(p.cx) + " " +
             format_double(p.cu) + " " + format_double(p.cv);
    case DataProfile::Kind::Bump:
      return "bump " + format_double(p.c0) + " " + format_double(p.amp);
  }
  return "";
}

std::string time_profile_string(const TimeProfile& p) {
  switch (p.kind) {
    case TimeProfile::Kind::Constant:
      return "const " + format_double(p.v0);
    case TimeProfile::Kind::Ramp:
      return "ramp " + format_double(p.v0) + " " + format_double(p.rate);
    case TimeProfile::Kind::Exponential:
      return "exp " + format_double(p.v0) + " " + format_double(p.rate);
  }
  return "";
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;

  using Setter = std::function<void(const std::vector<std::string>&, int)>;
  std::map<std::string, Setter> setters;
  auto set_double = [&](const std::string& key, double& field) {
    setters[key] = [&field, key](const std::vector<std::string>& tok, int line) {
      if (tok.size() != 1) {
        throw ConfigError(key + " expects a single value", line);
      }
      field = to_double(tok[0], line);
    };
  };
  auto set_int = [&](const std::string& key, int& field) {
    setters[key] = [&field, key](const std::vector<std::string>& tok, int line) {
      if (tok.size() != 1) {
        throw ConfigError(key + " expects a single value", line);
      }
      field = to_int(tok[0], line);
    };
  };
  auto set_bool = [&](const std::string& key, bool& field) {
    setters[key] = [&field, key](const std::vector<std::string>& tok, int line) {
      if (tok.size() != 1) {
        throw ConfigError(key + " expects a single value", line);
      }
      field = to_bool(tok[0], line);
    };
  };
  auto set_profile = [&](const std::string& key, DataProfile& field) {
    setters[key] = [&field](const std::vector<std::string>& tok, int line) {
      field = parse_profile(tok, line);
    };
  };

  set_int("macro_elements", cfg.macro_elements);
  set_double("macro_length", cfg.macro_length);
  set_int("micro_nx", cfg.micro_nx);
  set_int("micro_ny", cfg.micro_ny);
  set_double("dt", cfg.dt);
  set_double("t_final", cfg.t_final);
  set_int("slab_steps", cfg.slab_steps);
  set_int("output_every", cfg.output_every);
  set_double("tol_fp_outer", cfg.tol_fp_outer);
  set_double("tol_fp_inner", cfg.tol_fp_inner);
  set_double("tol_newton", cfg.tol_newton);
  set_double("tol_pos", cfg.tol_pos);
  set_int("max_outer", cfg.max_outer);
  set_int("max_inner", cfg.max_inner);
  set_int("max_newton", cfg.max_newton);
  set_bool("lumped", cfg.lumped);
  set_bool("schur", cfg.schur);
  set_bool("gauss_seidel", cfg.gauss_seidel);
  set_double("exchange_scale", cfg.exchange_scale);
  set_double("k_f1", cfg.kinetics.k_f1);
  set_double("k_f2", cfg.kinetics.k_f2);
  set_double("k_R", cfg.kinetics.k_R);
  set_double("k_Q", cfg.kinetics.k_Q);
  set_double("beta_max", cfg.kinetics.beta_max);
  set_double("henry", cfg.kinetics.henry);
  set_double("alpha", cfg.kinetics.alpha);
  set_double("p_R", cfg.kinetics.p_R);
  set_double("d1", cfg.d1);
  set_double("d2", cfg.d2);
  set_double("d3", cfg.d3);
  setters["trunc_m"] = [&cfg](const std::vector<std::string>& tok, int line) {
    if (tok.size() != 1) {
      throw ConfigError("trunc_m expects a single value", line);
    }
    if (tok[0] == "auto") {
      cfg.trunc_m.reset();
    } else {
      cfg.trunc_m = to_double(tok[0], line);
    }
  };
  set_profile("w1_init", cfg.w1_init);
  set_profile("w2_init", cfg.w2_init);
  set_profile("w3_init", cfg.w3_init);
  set_profile("w4_init", cfg.w4_init);
  setters["w3_dirichlet"] = [&cfg](const std::vector<std::string>& tok, int line) {
    cfg.w3_dirichlet = parse_time_profile(tok, line);
  };

  // Accepted alternate spellings, mapped onto the canonical key before the
  // duplicate check so both forms share one slot.
  const std::map<std::string, std::string> aliases = {{"T_final", "t_final"}};

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) {
      raw.erase(hash);
    }
    const std::string line = trim(raw);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value", line_no);
    }
    std::string key = trim(line.substr(0, eq));
    const auto alias = aliases.find(key);
    if (alias != aliases.end()) {
      key = alias->second;
    }
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("unknown key '" + key + "'", line_no);
    }
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate key '" + key + "'", line_no);
    }
    it->second(split_tokens(value), line_no);
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "macro_elements = " << cfg.macro_elements << "\n";
  out << "macro_length = " << format_double(cfg.macro_length) << "\n";
  out << "micro_nx = " << cfg.micro_nx << "\n";
  out << "micro_ny = " << cfg.micro_ny << "\n";
  out << "dt = " << format_double(cfg.dt) << "\n";
  out << "t_final = " << format_double(cfg.t_final) << "\n";
  out << "slab_steps = " << cfg.slab_steps << "\n";
  out << "output_every = " << cfg.output_every << "\n";
  out << "tol_fp_outer = " << format_double(cfg.tol_fp_outer) << "\n";
  out << "tol_fp_inner = " << format_double(cfg.tol_fp_inner) << "\n";
  out << "tol_newton = " << format_double(cfg.tol_newton) << "\n";
  out << "tol_pos = " << format_double(cfg.tol_pos) << "\n";
  out << "max_outer = " << cfg.max_outer << "\n";
  out << "max_inner = " << cfg.max_inner << "\n";
  out << "max_newton = " << cfg.max_newton << "\n";
  out << "lumped = " << (cfg.lumped ? "true" : "false") << "\n";
  out << "schur = " << (cfg.schur ? "true" : "false") << "\n";
  out << "gauss_seidel = " << (cfg.gauss_seidel ? "true" : "false") << "\n";
  out << "exchange_scale = " << format_double(cfg.exchange_scale) << "\n";
  out << "k_f1 = " << format_double(cfg.kinetics.k_f1) << "\n";
  out << "k_f2 = " << format_double(cfg.kinetics.k_f2) << "\n";
  out << "k_R = " << format_double(cfg.kinetics.k_R) << "\n";
  out << "k_Q = " << format_double(cfg.kinetics.k_Q) << "\n";
  out << "beta_max = " << format_double(cfg.kinetics.beta_max) << "\n";
  out << "henry = " << format_double(cfg.kinetics.henry) << "\n";
  out << "alpha = " << format_double(cfg.kinetics.alpha) << "\n";
  out << "p_R = " << format_double(cfg.kinetics.p_R) << "\n";
  out << "trunc_m = " << (cfg.trunc_m ? format_double(*cfg.trunc_m) : "auto") << "\n";
  out << "d1 = " << format_double(cfg.d1) << "\n";
  out << "d2 = " << format_double(cfg.d2) << "\n";
  out << "d3 = " << format_double(cfg.d3) << "\n";
  out << "w1_init = " << profile_string(cfg.w1_init) << "\n";
  out << "w2_init = " << profile_string(cfg.w2_init) << "\n";
  out << "w3_init = " << profile_string(cfg.w3_init) << "\n";
  out << "w4_init = " << profile_string(cfg.w4_init) << "\n";
  out << "w3_dirichlet = " << time_profile_string(cfg.w3_dirichlet) << "\n";
  return out.str();
}

}  // namespace twoscale
