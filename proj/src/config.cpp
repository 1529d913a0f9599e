#include "cisim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

#include "cisim/errors.hpp"

namespace cisim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

long long to_int(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'", key, line);
  }
  if (pos != v.size()) throw ConfigError("expected an integer, got '" + v + "'", key, line);
  return x;
}

std::uint64_t to_u64(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("expected an unsigned integer, got '" + v + "'", key, line);
  }
  if (pos != v.size() || v[0] == '-') {
    throw ConfigError("expected an unsigned integer, got '" + v + "'", key, line);
  }
  return x;
}

double to_double(const std::string& v, const std::string& key, int line) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", key, line);
  }
  if (pos != v.size()) throw ConfigError("expected a number, got '" + v + "'", key, line);
  return x;
}

std::string fmt_double(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    std::ostringstream out;
    out << static_cast<long long>(v);
    return out.str();
  }
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}

const char* mode_label(RunMode m) {
  switch (m) {
    case RunMode::ber_sweep: return "ber_sweep";
    case RunMode::feasibility: return "feasibility";
    case RunMode::iterations: return "iterations";
    case RunMode::verify: return "verify";
  }
  return "?";
}

RunMode parse_mode(const std::string& name) {
  if (name == "ber_sweep") return RunMode::ber_sweep;
  if (name == "feasibility") return RunMode::feasibility;
  if (name == "iterations") return RunMode::iterations;
  if (name == "verify") return RunMode::verify;
  throw ConfigError("unknown mode '" + name + "' (expected ber_sweep, feasibility, iterations or verify)");
}

const char* format_label(OutFormat f) { return f == OutFormat::csv ? "csv" : "json"; }

OutFormat parse_format(const std::string& name) {
  if (name == "csv") return OutFormat::csv;
  if (name == "json") return OutFormat::json;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

Scheme parse_scheme(const std::string& name) {
  if (name == "ZF") return Scheme::ZF;
  if (name == "RZF") return Scheme::RZF;
  if (name == "CI-Iterative") return Scheme::CI_Iterative;
  if (name == "CI-CF") return Scheme::CI_CF;
  if (name == "CI-Oracle") return Scheme::CI_Oracle;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected ZF, RZF, CI-Iterative, CI-CF or CI-Oracle)");
}

ExperimentSpec parse_config(const std::string& text) {
  ExperimentSpec spec;
  bool saw_k = false, saw_nt = false, saw_order = false, saw_trials = false;
  bool saw_out = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string stripped = raw.substr(0, raw.find('#'));
    std::string entry = trim(stripped);
    if (entry.empty()) continue;

    std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value'", "", line);
    }
    std::string key = trim(entry.substr(0, eq));
    std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", "", line);
    if (value.empty()) throw ConfigError("empty value", key, line);

    if (key == "mode") {
      try {
        spec.mode = parse_mode(value);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), key, line);
      }
    } else if (key == "K") {
      spec.sim.k_list.clear();
      for (const auto& item : split_list(value)) {
        spec.sim.k_list.push_back(static_cast<int>(to_int(item, key, line)));
      }
      saw_k = true;
    } else if (key == "Nt") {
      spec.sim.nt_list.clear();
      for (const auto& item : split_list(value)) {
        spec.sim.nt_list.push_back(static_cast<int>(to_int(item, key, line)));
      }
      saw_nt = true;
    } else if (key == "order") {
      spec.sim.order = static_cast<int>(to_int(value, key, line));
      saw_order = true;
    } else if (key == "p0") {
      spec.sim.p0 = to_double(value, key, line);
    } else if (key == "snr_db") {
      spec.sim.snr_db.clear();
      for (const auto& item : split_list(value)) {
        spec.sim.snr_db.push_back(to_double(item, key, line));
      }
    } else if (key == "trials") {
      spec.sim.trials = to_u64(value, key, line);
      saw_trials = true;
    } else if (key == "seed") {
      spec.sim.seed = to_u64(value, key, line);
    } else if (key == "schemes") {
      spec.sim.schemes.clear();
      for (const auto& item : split_list(value)) {
        try {
          spec.sim.schemes.push_back(parse_scheme(item));
        } catch (const ConfigError& e) {
          throw ConfigError(e.what(), key, line);
        }
      }
    } else if (key == "channel_reuse") {
      spec.sim.channel_reuse = to_u64(value, key, line);
    } else if (key == "iter_max") {
      spec.sim.iter_max = static_cast<int>(to_int(value, key, line));
    } else if (key == "threads") {
      spec.sim.threads = static_cast<int>(to_int(value, key, line));
    } else if (key == "out") {
      spec.out = value;
      saw_out = true;
    } else if (key == "format") {
      try {
        spec.format = parse_format(value);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), key, line);
      }
    } else {
      throw ConfigError("unknown key", key, line);
    }
  }

  if (!saw_k) throw ConfigError("missing required key", "K");
  if (!saw_nt) throw ConfigError("missing required key", "Nt");
  if (!saw_order) throw ConfigError("missing required key", "order");
  if (!saw_trials) throw ConfigError("missing required key", "trials");
  if (!saw_out) {
    spec.out = spec.format == OutFormat::csv ? "results.csv" : "results.json";
  }
  return spec;
}

std::string serialize_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "mode = " << mode_label(spec.mode) << "\n";
  out << "K = ";
  for (std::size_t i = 0; i < spec.sim.k_list.size(); ++i) {
    out << (i ? "," : "") << spec.sim.k_list[i];
  }
  out << "\n";
  out << "Nt = ";
  for (std::size_t i = 0; i < spec.sim.nt_list.size(); ++i) {
    out << (i ? "," : "") << spec.sim.nt_list[i];
  }
  out << "\n";
  out << "order = " << spec.sim.order << "\n";
  out << "p0 = " << fmt_double(spec.sim.p0) << "\n";
  if (!spec.sim.snr_db.empty()) {
    out << "snr_db = ";
    for (std::size_t i = 0; i < spec.sim.snr_db.size(); ++i) {
      out << (i ? "," : "") << fmt_double(spec.sim.snr_db[i]);
    }
    out << "\n";
  }
  out << "trials = " << spec.sim.trials << "\n";
  out << "seed = " << spec.sim.seed << "\n";
  if (!spec.sim.schemes.empty()) {
    out << "schemes = ";
    for (std::size_t i = 0; i < spec.sim.schemes.size(); ++i) {
      out << (i ? "," : "") << scheme_label(spec.sim.schemes[i]);
    }
    out << "\n";
  }
  out << "channel_reuse = " << spec.sim.channel_reuse << "\n";
  out << "iter_max = " << spec.sim.iter_max << "\n";
  out << "threads = " << spec.sim.threads << "\n";
  out << "out = " << spec.out << "\n";
  out << "format = " << format_label(spec.format) << "\n";
  return out.str();
}

void validate(const ExperimentSpec& spec) {
  const SimConfig& sim = spec.sim;
  if (sim.k_list.empty()) throw ConfigError("missing required key", "K");
  if (sim.nt_list.empty()) throw ConfigError("missing required key", "Nt");
  for (int k : sim.k_list) {
    if (k < 1) throw ConfigError("K entries must be >= 1", "K");
  }
  for (int nt : sim.nt_list) {
    if (nt < 1) throw ConfigError("Nt entries must be >= 1", "Nt");
  }
  if (sim.order < 4 || (sim.order & (sim.order - 1)) != 0 ||
      (static_cast<unsigned>(std::log2(sim.order)) % 2) != 0) {
    throw ConfigError("order must be a square QAM size (4, 16, 64, ...)", "order");
  }
  if (!(sim.p0 > 0.0)) throw ConfigError("p0 must be positive", "p0");
  if (sim.trials < 1) throw ConfigError("trials must be >= 1", "trials");
  if (sim.channel_reuse < 1) throw ConfigError("channel_reuse must be >= 1", "channel_reuse");
  if (sim.iter_max < 1) throw ConfigError("iter_max must be >= 1", "iter_max");
  if (sim.threads < 0) throw ConfigError("threads must be >= 0", "threads");
  for (double v : sim.snr_db) {
    if (!std::isfinite(v)) throw ConfigError("snr_db entries must be finite", "snr_db");
  }

  if (spec.mode == RunMode::ber_sweep) {
    if (sim.k_list.size() != 1 || sim.nt_list.size() != 1) {
      throw ConfigError("ber_sweep takes a single K and Nt", "K");
    }
    if (sim.snr_db.empty()) throw ConfigError("missing required key", "snr_db");
    if (sim.schemes.empty()) throw ConfigError("missing required key", "schemes");
    if (sim.k_list[0] > sim.nt_list[0]) {
      for (Scheme s : sim.schemes) {
        if (s == Scheme::ZF) throw ConfigError("ZF requires K <= Nt", "schemes");
      }
    }
  } else if (spec.mode == RunMode::verify) {
    if (sim.k_list.size() != 1 || sim.nt_list.size() != 1) {
      throw ConfigError("verify takes a single K and Nt", "K");
    }
  } else {
    if (sim.nt_list.size() != 1 && sim.nt_list.size() != sim.k_list.size()) {
      throw ConfigError("Nt must be scalar or match K's length", "Nt");
    }
  }
}

}
