// Instance and solution files. One JSON object per file:
//   instance: {kind, sizes[], rejection_costs[]?, positions[]?, metadata{}?}
//   solution: {bins[][], bin_notes[]?, rejected[]?, extra_bins, total_cost,
//              lp_objective}
// kind is "bp", "bpr" or "train". Every numeric field accepts a JSON number
// or a decimal string; the dyadic generator writes strings so grid values
// survive a round trip exactly.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroround/binpack.hpp"
#include "entroround/rounding.hpp"

namespace entroround {

// Result of reading an instance file. Sizes arrive sorted non-increasing;
// when the file was unsorted the loader applies a stable sort, records the
// original index of each slot in `order`, and appends a notice.
struct LoadedInstance {
    std::string kind;
    PackingInstance instance;
    std::vector<int> order;
    std::vector<std::string> notices;
};

// Parse from a string; `origin` names the source in error messages.
LoadedInstance parse_instance(const std::string& text, const std::string& origin);

LoadedInstance load_instance(const std::string& path);

// Serialize. With exact_decimals set, sizes (and positions) that are exact
// dyadics with up to 20 fractional bits are written as decimal strings.
std::string instance_to_json(const std::string& kind, const PackingInstance& inst,
                             bool exact_decimals = false);

std::string solution_to_json(const PackingSolution& sol);

PackingSolution parse_solution(const std::string& text, const std::string& origin);

PackingSolution load_solution(const std::string& path);

// Kind of an instance file without full validation; used for dispatch.
std::string peek_kind(const std::string& text, const std::string& origin);

// Rounding instances use kind "rounding": {kind, a[][], delta[], b[][]?,
// mu[]?, c[]?, x[]}. Empty matrices are legal; the column count comes from x.
RoundingInstance parse_rounding_instance(const std::string& text,
                                         const std::string& origin);

RoundingInstance load_rounding_instance(const std::string& path);

std::string rounding_instance_to_json(const RoundingInstance& inst);

std::string read_file(const std::string& path);

void write_file(const std::string& path, const std::string& text);

// Random instances. kind: bp | bpr | train. dist: uniform (sizes in (0,1]),
// dyadic (sizes on the halving grid 2^-1..2^-6), clustered (a few size
// values with jitter). BPR costs are uniform (0,1]; train positions sit on
// the (1+eps) grade grid with eps = 0.1.
PackingInstance generate_instance(const std::string& kind, int n, std::uint64_t seed,
                                  const std::string& dist);

}  // namespace entroround
