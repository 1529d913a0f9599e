#pragma once

#include <string>

#include "cisim/sim.hpp"

namespace cisim {

enum class RunMode { ber_sweep, feasibility, iterations, verify };
enum class OutFormat { csv, json };

struct ExperimentSpec {
  RunMode mode = RunMode::ber_sweep;
  SimConfig sim;
  std::string out; /* primary output path; defaulted from the format */
  OutFormat format = OutFormat::csv;
};

const char* mode_label(RunMode m);
RunMode parse_mode(const std::string& name);
const char* format_label(OutFormat f);
OutFormat parse_format(const std::string& name);
Scheme parse_scheme(const std::string& name);

/* Flat `key = value` text; '#' starts a comment; lists are comma separated.
 * Unknown keys, bad values, and missing required keys raise ConfigError with
 * the key name and line number. */
ExperimentSpec parse_config(const std::string& text);

/* Canonical text form; parse(serialize(spec)) reproduces spec exactly. */
std::string serialize_config(const ExperimentSpec& spec);

/* Mode-specific shape checks (scheme/regime compatibility, required lists). */
void validate(const ExperimentSpec& spec);

}
