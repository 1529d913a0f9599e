#pragma once

#include <string>
#include <vector>

#include "cisim/config.hpp"
#include "cisim/sim.hpp"

namespace cisim {

/* Plot-ready CSV: pinned header, rows sorted by (scheme, snr_db), inapplicable
 * fields left empty, trailing '#' comments carrying the version string and the
 * serialized config so the file reproduces itself. */
void write_csv(const BerResult& r, const ExperimentSpec& spec, const std::string& path);
void write_csv(const FeasibilityResult& r, const ExperimentSpec& spec, const std::string& path);

/* Same rows as the CSV plus the structured config and seed. */
void write_json(const BerResult& r, const ExperimentSpec& spec, const std::string& path);
void write_json(const FeasibilityResult& r, const ExperimentSpec& spec, const std::string& path);

/* format = csv writes spec.out plus a .json mirror at the same stem;
 * format = json writes only the JSON. Returns the paths written. */
std::vector<std::string> emit_results(const BerResult& r, const ExperimentSpec& spec);
std::vector<std::string> emit_results(const FeasibilityResult& r, const ExperimentSpec& spec);

}
