#include "cisim/emit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cisim/errors.hpp"
#include "cisim/version.hpp"

namespace cisim {

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Row {
  std::string scheme;
  std::string snr; /* empty when the run has no SNR axis */
  double snr_val = 0;
  std::string ber;
  std::string std_err;
  std::uint64_t trials = 0;
  std::string mean_iter;
  std::string feas;
};

std::vector<Row> rows_of(const BerResult& r) {
  std::vector<Row> rows;
  rows.reserve(r.cells.size());
  for (const auto& cell : r.cells) {
    Row row;
    row.scheme = scheme_label(cell.scheme);
    row.snr_val = cell.snr_db;
    row.snr = fmt_g(cell.snr_db);
    row.ber = fmt_g(cell.ber());
    row.std_err = fmt_g(cell.std_error());
    row.trials = cell.slots;
    if (cell.has_iterations) row.mean_iter = fmt_g(cell.mean_iterations());
    if (cell.has_feasibility) row.feas = fmt_g(cell.feasibility());
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    if (x.scheme != y.scheme) return x.scheme < y.scheme;
    return x.snr_val < y.snr_val;
  });
  return rows;
}

std::vector<Row> rows_of(const FeasibilityResult& r) {
  std::vector<Row> rows;
  rows.reserve(r.points.size());
  for (const auto& p : r.points) {
    Row row;
    char label[64];
    std::snprintf(label, sizeof label, "CI-Iterative[K=%02d,Nt=%02d]", p.K, p.Nt);
    row.scheme = label;
    row.trials = p.slots;
    row.mean_iter = fmt_g(p.mean_iterations());
    row.feas = fmt_g(p.feasibility());
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& x, const Row& y) { return x.scheme < y.scheme; });
  return rows;
}

void write_rows_csv(const std::vector<Row>& rows, const ExperimentSpec& spec,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << "scheme,snr_db,ber,stderr,trials,mean_iterations,feasibility\n";
  for (const Row& row : rows) {
    out << row.scheme << ',' << row.snr << ',' << row.ber << ',' << row.std_err << ','
        << row.trials << ',' << row.mean_iter << ',' << row.feas << '\n';
  }
  out << "# version: " << kVersion << '\n';
  std::istringstream cfg(serialize_config(spec));
  std::string line;
  while (std::getline(cfg, line)) out << "# config: " << line << '\n';
  out.flush();
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

nlohmann::json json_or_null(const std::string& s) {
  if (s.empty()) return nullptr;
  return std::stod(s);
}

nlohmann::json config_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["mode"] = mode_label(spec.mode);
  j["K"] = spec.sim.k_list;
  j["Nt"] = spec.sim.nt_list;
  j["order"] = spec.sim.order;
  j["p0"] = spec.sim.p0;
  j["snr_db"] = spec.sim.snr_db;
  j["trials"] = spec.sim.trials;
  j["seed"] = spec.sim.seed;
  std::vector<std::string> schemes;
  for (Scheme s : spec.sim.schemes) schemes.push_back(scheme_label(s));
  j["schemes"] = schemes;
  j["channel_reuse"] = spec.sim.channel_reuse;
  j["iter_max"] = spec.sim.iter_max;
  j["threads"] = spec.sim.threads;
  j["out"] = spec.out;
  j["format"] = format_label(spec.format);
  return j;
}

void write_rows_json(const std::vector<Row>& rows, const ExperimentSpec& spec,
                     const std::string& path) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_json(spec);
  j["seed"] = spec.sim.seed;
  nlohmann::json arr = nlohmann::json::array();
  for (const Row& row : rows) {
    nlohmann::json rj;
    rj["scheme"] = row.scheme;
    rj["snr_db"] = json_or_null(row.snr);
    rj["ber"] = json_or_null(row.ber);
    rj["stderr"] = json_or_null(row.std_err);
    rj["trials"] = row.trials;
    rj["mean_iterations"] = json_or_null(row.mean_iter);
    rj["feasibility"] = json_or_null(row.feas);
    arr.push_back(std::move(rj));
  }
  j["rows"] = std::move(arr);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

std::string json_mirror_path(const std::string& path) {
  std::size_t slash = path.find_last_of('/');
  std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + ".json";
  }
  return path.substr(0, dot) + ".json";
}

template <typename Result>
std::vector<std::string> emit_impl(const Result& r, const ExperimentSpec& spec) {
  std::vector<std::string> written;
  if (spec.format == OutFormat::json) {
    write_json(r, spec, spec.out);
    written.push_back(spec.out);
    return written;
  }
  write_csv(r, spec, spec.out);
  written.push_back(spec.out);
  std::string mirror = json_mirror_path(spec.out);
  if (mirror != spec.out) {
    write_json(r, spec, mirror);
    written.push_back(mirror);
  }
  return written;
}

}

void write_csv(const BerResult& r, const ExperimentSpec& spec, const std::string& path) {
  write_rows_csv(rows_of(r), spec, path);
}

void write_csv(const FeasibilityResult& r, const ExperimentSpec& spec, const std::string& path) {
  write_rows_csv(rows_of(r), spec, path);
}

void write_json(const BerResult& r, const ExperimentSpec& spec, const std::string& path) {
  write_rows_json(rows_of(r), spec, path);
}

void write_json(const FeasibilityResult& r, const ExperimentSpec& spec, const std::string& path) {
  write_rows_json(rows_of(r), spec, path);
}

std::vector<std::string> emit_results(const BerResult& r, const ExperimentSpec& spec) {
  return emit_impl(r, spec);
}

std::vector<std::string> emit_results(const FeasibilityResult& r, const ExperimentSpec& spec) {
  return emit_impl(r, spec);
}

}
