// Packing pipelines built on the rounding engine: cumulated prefix-count
// matrices, deficit bookkeeping and repair, reserved-space assignment for
// small items, and the two end-to-end solvers (bin packing with rejection,
// train delivery).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroround/config.hpp"
#include "entroround/matrix.hpp"
#include "entroround/pattern.hpp"

namespace entroround {

// One packing instance. Sizes are sorted non-increasing, each in (0,1]. The
// optional vectors select the problem kind: per-item rejection costs for bin
// packing with rejection, per-item line positions for train delivery. At
// most one of the two may be present.
struct PackingInstance {
    Vec sizes;
    Vec rejection_costs;
    Vec positions;

    int n() const { return static_cast<int>(sizes.size()); }
    bool has_rejection() const { return !rejection_costs.empty(); }
    bool has_positions() const { return !positions.empty(); }
    void validate() const;
};

// Size groups over the large items of a domain, plus position groups for
// train delivery. Indices always refer to the instance numbering.
struct ItemGroups {
    int large_count = 0;
    // Grade l holds items with 2^-l >= s_i > 2^-(l+1); only items of size
    // >= eps are grouped. Entries ascend, so front() is the group's largest.
    std::vector<std::vector<int>> size_groups;
    // Grade j holds items whose rounded position is (1+eps)^-j. Filled by
    // the train pipeline, empty elsewhere.
    std::vector<std::vector<int>> position_groups;
};

// Groups the given items (ascending instance indices) by size halving
// grades; items below eps stay out and are counted as small.
ItemGroups build_groups(const Vec& sizes, const std::vector<int>& items, double eps);

// Prefix-count matrix over a designated item subset: one row per kept item i
// (ascending), entries |S cap {0..i} cap kept| per pattern column. Columns
// are non-decreasing top to bottom; sigma sums the per-column maxima and
// beta takes the largest one. deltas carries the per-row slack c / s_i.
struct CumulatedMatrix {
    std::vector<Pattern> patterns;
    std::vector<int> rows;
    DenseMatrix entries;
    Vec deltas;
    double sigma = 0.0;
    double beta = 0.0;
};

CumulatedMatrix cumulated_matrix(const std::vector<Pattern>& patterns,
                                 const std::vector<int>& kept, const Vec& sizes,
                                 double row_slack_c);

// Budget curve for the joint signature entropy of a cumulated matrix:
// scale * sigma * beta / delta^2. The calibration corpus pins the scale so
// the exact enumeration stays below this on every tested submatrix.
double entropy_budget_bound(const CumulatedMatrix& m, double delta, double scale);

// A bin bought outside the pattern pool during repair. Slots are item
// indices (repeats allowed); a slot can host any item at least as far down
// the size order as the slot's own item. position_grade tags the train
// position the bin was bought for, -1 for plain bins.
struct RepairBin {
    std::vector<int> slots;
    int position_grade = -1;
};

// Per-prefix slot shortfall over the domain: for the prefix ending at
// domain[k], max(0, k+1 - #slots with index <= domain[k]). Slots come from
// chosen pattern members inside the domain and from repair bins.
std::vector<long long> check_deficits(const std::vector<Pattern>& chosen,
                                      const std::vector<RepairBin>& extra,
                                      const std::vector<int>& domain);

// Greedy slot assignment, increasing item index, each item taking the
// smallest adequate slot (the largest slot index <= the item's own). With
// rejection_mode, a chosen singleton cheaper than a bin is a rejection slot
// usable only by its own item. Fails iff some prefix runs dry.
struct SlotAssignment {
    std::vector<std::vector<int>> pattern_items;  // parallel to chosen
    std::vector<std::vector<int>> extra_items;    // parallel to extra
    std::vector<int> rejected;
    bool ok = true;
    int deficient_prefix = -1;  // 1-based position in the domain when !ok
};

SlotAssignment assign_items_to_slots(const std::vector<Pattern>& chosen,
                                     const std::vector<RepairBin>& extra,
                                     const std::vector<int>& domain,
                                     bool rejection_mode);

// Buys bins until the domain has no prefix deficits. First runs up to
// ceil(log_budget * log2(L+2)) rounds that pack one copy of every group's
// largest item (splitting a round across bins when the representatives
// exceed unit capacity), then tops up with bins filled with copies of the
// deficient group's representative. The result always recounts to zero.
std::vector<RepairBin> repair_large(const std::vector<Pattern>& chosen,
                                    const std::vector<int>& domain,
                                    const ItemGroups& groups, const Vec& sizes,
                                    double log_budget);

// Fractional greedy fill of reserved spaces by small items in the given
// order, splitting at space boundaries; a split item is discarded from the
// space it started in (at most one per space), everything else is placed.
struct SmallAssignment {
    std::vector<std::vector<int>> per_space;  // parallel to spaces
    std::vector<int> discarded;
};

SmallAssignment assign_small_fractional(const Vec& spaces, const std::vector<int>& items,
                                        const Vec& sizes);

// Positions raised to the nearest (1+eps)-grade; positions below eps are
// clamped up to the smallest grade >= eps (a simplification: near-depot
// items could instead ride split tours, but the clamp only ever raises a
// position by less than eps).
PackingInstance well_round(const PackingInstance& inst, double eps);

// Integral output of a pipeline. bins holds the final item placement, one
// entry per bought bin (tour); bin_notes tags each bin's provenance
// ("pattern", "repair", "small", "discard"). Cost is the number of unit
// bins plus rejection charges, or the sum of per-tour max positions.
struct PackingSolution {
    std::vector<std::vector<int>> bins;
    std::vector<std::string> bin_notes;
    std::vector<int> rejected;
    int extra_bins = 0;
    double total_cost = 0.0;
    double lp_objective = 0.0;
};

PackingSolution solve_bpr(const PackingInstance& inst, const Config& cfg,
                          std::uint64_t seed);

PackingSolution solve_train(const PackingInstance& inst, const Config& cfg,
                            std::uint64_t seed);

// Exhaustive reference optima: integer by subset dynamic programming
// (n <= 12), fractional by full pattern enumeration plus the exact covering
// solver (n <= 8; NaN beyond that cap).
struct BruteForceResult {
    double integer_opt = 0.0;
    double fractional_opt = 0.0;
    bool fractional_available = false;
};

BruteForceResult brute_force_opt(const PackingInstance& inst);

// Recomputes feasibility and cost from scratch: exact item partition across
// bins and rejections, loads <= 1 + 1e-9, no empty bin listed, stored cost
// matching the recomputation. Returns an empty string when everything
// holds, otherwise a description of the first violation.
std::string check_packing(const PackingInstance& inst, const PackingSolution& sol);

}  // namespace entroround
