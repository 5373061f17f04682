#include "entroround/binpack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "entroround/lp.hpp"
#include "entroround/oracles.hpp"
#include "entroround/rng.hpp"
#include "entroround/rounding.hpp"

namespace entroround {

namespace {

constexpr double kLoadTol = 1e-9;

// A chosen singleton cheaper than a whole bin is a rejection, not a one-item
// bin. Unit-cost singletons stay bins; for an item with rejection charge
// exactly 1 the two readings cost the same.
bool is_rejection(const Pattern& p) {
    return p.items.size() == 1 && p.cost < 1.0 - 1e-12;
}

std::vector<std::vector<int>> first_fit(const std::vector<int>& items, const Vec& sizes) {
    std::vector<std::vector<int>> bins;
    std::vector<double> loads;
    for (int t : items) {
        double s = sizes[static_cast<size_t>(t)];
        size_t b = 0;
        while (b < bins.size() && loads[b] + s > 1.0 + 1e-12) ++b;
        if (b == bins.size()) {
            bins.emplace_back();
            loads.push_back(0.0);
        }
        bins[b].push_back(t);
        loads[b] += s;
    }
    return bins;
}

// Objective fold, basic reduction, then the bit-by-bit rounding. The result
// must be integral; anything else is a terminal failure of the stage.
Vec run_rounding(const RoundingInstance& inst, const Config& cfg, std::uint64_t seed,
                 const char* stage) {
    RoundingInstance prepared = append_objective_row(inst);
    ReduceOutcome red = reduce_to_basic(prepared);
    RoundingReport rep = entropy_round(red.inst, RoundingBackend::Exhaustive, cfg, seed);
    if (!rep.success)
        throw std::runtime_error(std::string(stage) + ": rounding failed: " + rep.note);
    Vec y = rep.y;
    for (double& v : y) {
        double r = std::round(v);
        if (std::abs(v - r) > 1e-9)
            throw std::runtime_error(std::string(stage) +
                                     ": rounding left a fractional weight");
        v = r;
    }
    return y;
}

void require_kind(const PackingInstance& inst, bool rejection, const char* who) {
    inst.validate();
    if (inst.n() < 1)
        throw std::invalid_argument(std::string(who) + ": empty instance");
    if (rejection && (!inst.has_rejection() || inst.has_positions()))
        throw std::invalid_argument(std::string(who) + ": needs rejection costs only");
    if (!rejection && (!inst.has_positions() || inst.has_rejection()))
        throw std::invalid_argument(std::string(who) + ": needs positions only");
}

}  // namespace

void PackingInstance::validate() const {
    for (size_t i = 0; i < sizes.size(); ++i) {
        double s = sizes[i];
        if (!(s > 0.0) || s > 1.0)
            throw std::invalid_argument("packing: sizes must lie in (0,1]");
        if (i > 0 && sizes[i - 1] < s - 1e-15)
            throw std::invalid_argument("packing: sizes must be sorted non-increasing");
    }
    if (has_rejection() && has_positions())
        throw std::invalid_argument("packing: rejection costs and positions together are not supported");
    if (has_rejection() && rejection_costs.size() != sizes.size())
        throw std::invalid_argument("packing: rejection costs out of step with sizes");
    if (has_positions() && positions.size() != sizes.size())
        throw std::invalid_argument("packing: positions out of step with sizes");
    for (double c : rejection_costs)
        if (!(c > 0.0) || c > 1.0)
            throw std::invalid_argument("packing: rejection costs must lie in (0,1]");
    for (double p : positions)
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("packing: positions must lie in (0,1]");
}

ItemGroups build_groups(const Vec& sizes, const std::vector<int>& items, double eps) {
    if (!(eps > 0.0) || eps > 1.0)
        throw std::invalid_argument("packing: group threshold must lie in (0,1]");
    ItemGroups out;
    for (int t : items) {
        double s = sizes.at(static_cast<size_t>(t));
        if (s < eps) continue;
        ++out.large_count;
        int l = 0;
        while (s <= std::ldexp(1.0, -(l + 1))) ++l;  // grade l: 2^-l >= s > 2^-(l+1)
        if (static_cast<size_t>(l) >= out.size_groups.size())
            out.size_groups.resize(static_cast<size_t>(l) + 1);
        out.size_groups[static_cast<size_t>(l)].push_back(t);
    }
    return out;
}

CumulatedMatrix cumulated_matrix(const std::vector<Pattern>& patterns,
                                 const std::vector<int>& kept, const Vec& sizes,
                                 double row_slack_c) {
    if (!(row_slack_c > 0.0))
        throw std::invalid_argument("packing: row slack constant must be positive");
    for (size_t k = 1; k < kept.size(); ++k)
        if (kept[k - 1] >= kept[k])
            throw std::invalid_argument("packing: kept items must ascend");

    CumulatedMatrix out;
    out.patterns = patterns;
    out.rows = kept;
    const int rows = static_cast<int>(kept.size());
    const int cols = static_cast<int>(patterns.size());
    out.entries = DenseMatrix(rows, cols);
    std::unordered_set<int> keep(kept.begin(), kept.end());
    for (int j = 0; j < cols; ++j) {
        std::vector<int> members;
        for (int t : patterns[static_cast<size_t>(j)].items)
            if (keep.count(t)) members.push_back(t);
        size_t mp = 0;
        for (int i = 0; i < rows; ++i) {
            while (mp < members.size() && members[mp] <= kept[static_cast<size_t>(i)]) ++mp;
            out.entries.at(i, j) = static_cast<double>(mp);
        }
        double colmax = rows > 0 ? out.entries.at(rows - 1, j) : 0.0;
        out.sigma += colmax;
        out.beta = std::max(out.beta, colmax);
    }
    out.deltas.resize(static_cast<size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        double s = sizes.at(static_cast<size_t>(kept[static_cast<size_t>(i)]));
        if (!(s > 0.0))
            throw std::invalid_argument("packing: sizes must be positive");
        out.deltas[static_cast<size_t>(i)] = row_slack_c / s;
    }
    return out;
}

double entropy_budget_bound(const CumulatedMatrix& m, double delta, double scale) {
    if (!(delta > 0.0))
        throw std::invalid_argument("packing: budget delta must be positive");
    if (!(scale > 0.0))
        throw std::invalid_argument("packing: budget scale must be positive");
    return scale * m.sigma * m.beta / (delta * delta);
}

std::vector<long long> check_deficits(const std::vector<Pattern>& chosen,
                                      const std::vector<RepairBin>& extra,
                                      const std::vector<int>& domain) {
    std::vector<long long> out(domain.size(), 0);
    if (domain.empty()) return out;
    std::unordered_set<int> dom(domain.begin(), domain.end());
    std::vector<int> slots;
    for (const Pattern& p : chosen)
        for (int t : p.items)
            if (dom.count(t)) slots.push_back(t);
    for (const RepairBin& rb : extra)
        for (int t : rb.slots)
            if (dom.count(t)) slots.push_back(t);
    std::sort(slots.begin(), slots.end());
    size_t sp = 0;
    for (size_t k = 0; k < domain.size(); ++k) {
        while (sp < slots.size() && slots[sp] <= domain[k]) ++sp;
        out[k] = std::max(0LL, static_cast<long long>(k) + 1 - static_cast<long long>(sp));
    }
    return out;
}

SlotAssignment assign_items_to_slots(const std::vector<Pattern>& chosen,
                                     const std::vector<RepairBin>& extra,
                                     const std::vector<int>& domain,
                                     bool rejection_mode) {
    SlotAssignment out;
    out.pattern_items.assign(chosen.size(), {});
    out.extra_items.assign(extra.size(), {});
    if (domain.empty()) return out;
    std::unordered_set<int> dom(domain.begin(), domain.end());

    // (slot index, owning bin); bins number the chosen patterns first, then
    // the repair bins.
    std::vector<std::pair<int, int>> slots;
    std::unordered_set<int> reject_here;
    for (size_t b = 0; b < chosen.size(); ++b) {
        const Pattern& p = chosen[b];
        if (rejection_mode && is_rejection(p)) {
            if (dom.count(p.items.front())) reject_here.insert(p.items.front());
            continue;
        }
        for (int t : p.items)
            if (dom.count(t)) slots.emplace_back(t, static_cast<int>(b));
    }
    for (size_t b = 0; b < extra.size(); ++b)
        for (int t : extra[b].slots)
            if (dom.count(t))
                slots.emplace_back(t, static_cast<int>(chosen.size() + b));
    std::sort(slots.begin(), slots.end());

    // The smallest adequate slot is the one with the largest index <= the
    // item's own, so feed a max-heap with the slots unlocked so far.
    std::priority_queue<std::pair<int, int>> ready;
    size_t sp = 0;
    for (size_t k = 0; k < domain.size(); ++k) {
        int item = domain[k];
        while (sp < slots.size() && slots[sp].first <= item) ready.push(slots[sp++]);
        if (reject_here.count(item)) {
            out.rejected.push_back(item);
            continue;
        }
        if (ready.empty()) {
            out.ok = false;
            out.deficient_prefix = static_cast<int>(k) + 1;
            return out;
        }
        int bin = ready.top().second;
        ready.pop();
        if (bin < static_cast<int>(chosen.size()))
            out.pattern_items[static_cast<size_t>(bin)].push_back(item);
        else
            out.extra_items[static_cast<size_t>(bin) - chosen.size()].push_back(item);
    }
    return out;
}

std::vector<RepairBin> repair_large(const std::vector<Pattern>& chosen,
                                    const std::vector<int>& domain,
                                    const ItemGroups& groups, const Vec& sizes,
                                    double log_budget) {
    std::vector<RepairBin> extra;
    if (domain.empty()) return extra;
    std::vector<long long> def = check_deficits(chosen, extra, domain);
    auto worst = [](const std::vector<long long>& d) {
        long long w = 0;
        for (long long v : d) w = std::max(w, v);
        return w;
    };
    if (worst(def) == 0) return extra;

    std::vector<int> reps;
    for (const auto& g : groups.size_groups)
        if (!g.empty()) reps.push_back(g.front());
    if (reps.empty())
        throw std::logic_error("packing: deficits without any size group");

    // Budgeted rounds: one copy of every representative, split across bins
    // when they do not share one. Every positive deficit drops by at least
    // one per round, so small shortfalls vanish here.
    const double l = static_cast<double>(domain.size());
    const long rounds =
        static_cast<long>(std::ceil(log_budget * std::log2(l + 2.0)));
    for (long r = 0; r < rounds && worst(def) > 0; ++r) {
        RepairBin bin;
        double load = 0.0;
        for (int rep : reps) {
            double s = sizes[static_cast<size_t>(rep)];
            if (!bin.slots.empty() && load + s > 1.0 + 1e-12) {
                extra.push_back(bin);
                bin.slots.clear();
                load = 0.0;
            }
            bin.slots.push_back(rep);
            load += s;
        }
        if (!bin.slots.empty()) extra.push_back(bin);
        def = check_deficits(chosen, extra, domain);
    }

    // Targeted top-up: whole bins of the deficient group's representative
    // until every prefix is covered. Keeps the zero-deficit postcondition
    // unconditional when the budgeted rounds fall short.
    std::unordered_map<int, int> rep_of;
    for (const auto& g : groups.size_groups)
        for (int t : g) rep_of[t] = g.front();
    long guard = 0;
    while (true) {
        size_t k = 0;
        while (k < def.size() && def[k] == 0) ++k;
        if (k == def.size()) break;
        if (++guard > 100000)
            throw std::runtime_error("packing: repair did not converge");
        auto it = rep_of.find(domain[k]);
        if (it == rep_of.end())
            throw std::logic_error("packing: deficient item outside every group");
        double s = sizes[static_cast<size_t>(it->second)];
        long long copies = static_cast<long long>(std::floor((1.0 + 1e-12) / s));
        copies = std::max(1LL, std::min(copies, def[k]));
        RepairBin bin;
        bin.slots.assign(static_cast<size_t>(copies), it->second);
        extra.push_back(bin);
        def = check_deficits(chosen, extra, domain);
    }
    return extra;
}

SmallAssignment assign_small_fractional(const Vec& spaces, const std::vector<int>& items,
                                        const Vec& sizes) {
    SmallAssignment out;
    out.per_space.assign(spaces.size(), {});
    double total_space = 0.0;
    for (double s : spaces) {
        if (s < -1e-12)
            throw std::invalid_argument("packing: negative reserved space");
        total_space += s;
    }
    double total_need = 0.0;
    for (int t : items) total_need += sizes.at(static_cast<size_t>(t));
    if (total_need > total_space + 1e-9)
        throw std::runtime_error("packing: small items exceed the reserved space");

    // Virtual fractional fill: items occupy consecutive stretches of the
    // concatenated spaces. An item crossing a space boundary is discarded
    // from the space it started in, and its stretch stays consumed, so no
    // space sheds more than one item.
    std::vector<double> ends(spaces.size(), 0.0);
    double acc = 0.0;
    for (size_t j = 0; j < spaces.size(); ++j) {
        acc += spaces[j];
        ends[j] = acc;
    }
    double pos = 0.0;
    size_t cur = 0;
    for (int t : items) {
        double s = sizes[static_cast<size_t>(t)];
        while (cur < ends.size() && pos >= ends[cur] - 1e-12) ++cur;
        if (cur == ends.size())
            throw std::runtime_error("packing: small items exceed the reserved space");
        if (pos + s <= ends[cur] + kLoadTol)
            out.per_space[cur].push_back(t);
        else
            out.discarded.push_back(t);
        pos += s;
    }
    return out;
}

PackingInstance well_round(const PackingInstance& inst, double eps) {
    inst.validate();
    if (!inst.has_positions())
        throw std::invalid_argument("packing: well_round needs positions");
    if (!(eps > 0.0) || eps >= 1.0)
        throw std::invalid_argument("packing: well_round eps must lie in (0,1)");
    PackingInstance out = inst;
    const double lg = std::log1p(eps);
    const long j_max = static_cast<long>(std::floor(std::log(1.0 / eps) / lg + 1e-9));
    for (double& p : out.positions) {
        long j = static_cast<long>(std::floor(std::log(1.0 / p) / lg + 1e-9));
        j = std::clamp(j, 0L, j_max);
        p = std::pow(1.0 + eps, -static_cast<double>(j));
    }
    return out;
}

BruteForceResult brute_force_opt(const PackingInstance& inst) {
    inst.validate();
    const int n = inst.n();
    if (n > 12)
        throw std::invalid_argument("packing: brute force capped at 12 items");
    BruteForceResult out;
    out.fractional_opt = std::numeric_limits<double>::quiet_NaN();
    const int full = (1 << n) - 1;

    std::vector<double> load(static_cast<size_t>(full) + 1, 0.0);
    std::vector<double> maxp(static_cast<size_t>(full) + 1, 0.0);
    for (int mask = 1; mask <= full; ++mask) {
        int idx = std::countr_zero(static_cast<unsigned>(mask));
        int rest = mask & (mask - 1);
        load[static_cast<size_t>(mask)] =
            load[static_cast<size_t>(rest)] + inst.sizes[static_cast<size_t>(idx)];
        if (inst.has_positions())
            maxp[static_cast<size_t>(mask)] =
                std::max(maxp[static_cast<size_t>(rest)],
                         inst.positions[static_cast<size_t>(idx)]);
    }

    // One bin (or the rejection) of the lowest-index item per step.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(static_cast<size_t>(full) + 1, inf);
    f[0] = 0.0;
    for (int mask = 1; mask <= full; ++mask) {
        int low = mask & -mask;
        double best = inf;
        if (inst.has_rejection()) {
            int idx = std::countr_zero(static_cast<unsigned>(mask));
            best = f[static_cast<size_t>(mask ^ low)] +
                   inst.rejection_costs[static_cast<size_t>(idx)];
        }
        for (int sub = mask; sub > 0; sub = (sub - 1) & mask) {
            if (!(sub & low) || load[static_cast<size_t>(sub)] > 1.0 + kLoadTol) continue;
            double c = inst.has_positions() ? maxp[static_cast<size_t>(sub)] : 1.0;
            best = std::min(best, f[static_cast<size_t>(mask ^ sub)] + c);
        }
        f[static_cast<size_t>(mask)] = best;
    }
    out.integer_opt = f[static_cast<size_t>(full)];

    if (n <= 8) {
        std::vector<Pattern> columns;
        for (int mask = 1; mask <= full; ++mask) {
            if (load[static_cast<size_t>(mask)] > 1.0 + kLoadTol) continue;
            Pattern p;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) p.items.push_back(i);
            p.cost = inst.has_positions() ? maxp[static_cast<size_t>(mask)] : 1.0;
            columns.push_back(std::move(p));
        }
        if (inst.has_rejection())
            for (int i = 0; i < n; ++i) {
                Pattern p;
                p.items = {i};
                p.cost = inst.rejection_costs[static_cast<size_t>(i)];
                columns.push_back(std::move(p));
            }
        SimplexResult lp = solve_covering_simplex(columns, n);
        if (lp.status != SimplexStatus::Optimal || !lp.certified)
            throw std::runtime_error("packing: reference lp failed to certify");
        out.fractional_opt = lp.value;
        out.fractional_available = true;
    }
    return out;
}

std::string check_packing(const PackingInstance& inst, const PackingSolution& sol) {
    try {
        inst.validate();
    } catch (const std::exception& e) {
        return e.what();
    }
    const int n = inst.n();
    std::vector<int> seen(static_cast<size_t>(n), 0);
    for (size_t b = 0; b < sol.bins.size(); ++b) {
        const auto& bin = sol.bins[b];
        if (bin.empty()) return "bin " + std::to_string(b) + " is empty";
        double load = 0.0;
        for (int t : bin) {
            if (t < 0 || t >= n) return "bin item out of range";
            ++seen[static_cast<size_t>(t)];
            load += inst.sizes[static_cast<size_t>(t)];
        }
        if (load > 1.0 + kLoadTol)
            return "bin " + std::to_string(b) + " overfull: " + std::to_string(load);
    }
    for (int t : sol.rejected) {
        if (t < 0 || t >= n) return "rejected item out of range";
        if (!inst.has_rejection()) return "rejection without rejection costs";
        ++seen[static_cast<size_t>(t)];
    }
    for (int i = 0; i < n; ++i) {
        if (seen[static_cast<size_t>(i)] == 0)
            return "item " + std::to_string(i) + " unplaced";
        if (seen[static_cast<size_t>(i)] > 1)
            return "item " + std::to_string(i) + " placed more than once";
    }
    double cost = 0.0;
    if (inst.has_positions()) {
        for (const auto& bin : sol.bins) {
            double far = 0.0;
            for (int t : bin) far = std::max(far, inst.positions[static_cast<size_t>(t)]);
            cost += far;
        }
    } else {
        cost += static_cast<double>(sol.bins.size());
    }
    for (int t : sol.rejected) cost += inst.rejection_costs[static_cast<size_t>(t)];
    if (std::abs(cost - sol.total_cost) > 1e-6 * (1.0 + std::abs(cost)))
        return "stored cost " + std::to_string(sol.total_cost) +
               " does not match recomputed " + std::to_string(cost);
    if (!sol.bin_notes.empty() && sol.bin_notes.size() != sol.bins.size())
        return "bin notes out of step with bins";
    return "";
}

PackingSolution solve_bpr(const PackingInstance& inst, const Config& cfg,
                          std::uint64_t seed) {
    require_kind(inst, true, "bpr");
    const int n = inst.n();
    const Vec& sizes = inst.sizes;
    const Vec& pi = inst.rejection_costs;

    PatternFamily family;
    family.n = n;
    family.min_cost = 1.0;
    for (double c : pi) family.min_cost = std::min(family.min_cost, c);
    family.oracle = [&sizes, &pi](const Vec& prices, double eps_prime) {
        return bpr_oracle(prices, sizes, pi, eps_prime);
    };
    SparseSolution frac = solve_pattern_lp(family, 1.0);

    PackingSolution out;
    out.lp_objective = frac.objective;
    const double optf = std::max(2.0, frac.objective);
    const double eps = std::min(0.5, std::log2(optf) / optf);

    // Items whose rejection already carries almost all of their coverage are
    // rejected outright; their singleton leaves the pool and the item the
    // instance.
    std::vector<char> gone(static_cast<size_t>(n), 0);
    {
        std::vector<WeightedPattern> keep;
        keep.reserve(frac.entries.size());
        for (const WeightedPattern& e : frac.entries) {
            if (is_rejection(e.pattern) && e.weight > 1.0 - eps) {
                gone[static_cast<size_t>(e.pattern.items.front())] = 1;
                continue;
            }
            keep.push_back(e);
        }
        frac.entries = std::move(keep);
    }
    for (int i = 0; i < n; ++i)
        if (gone[static_cast<size_t>(i)]) out.rejected.push_back(i);

    std::vector<int> large, small;
    for (int i = 0; i < n; ++i) {
        if (gone[static_cast<size_t>(i)]) continue;
        (sizes[static_cast<size_t>(i)] >= eps ? large : small).push_back(i);
    }

    if (frac.entries.empty()) {
        if (!large.empty() || !small.empty())
            throw std::logic_error("packing: coverage lost before rounding");
        for (int t : out.rejected) out.total_cost += pi[static_cast<size_t>(t)];
        return out;
    }

    const int m = static_cast<int>(frac.entries.size());
    std::vector<Pattern> pool(static_cast<size_t>(m));
    Vec weights(static_cast<size_t>(m)), costs(static_cast<size_t>(m));
    Vec b1(static_cast<size_t>(m), 0.0);  // reserved small-item space per column
    for (int j = 0; j < m; ++j) {
        pool[static_cast<size_t>(j)] = frac.entries[static_cast<size_t>(j)].pattern;
        weights[static_cast<size_t>(j)] =
            std::min(1.0, frac.entries[static_cast<size_t>(j)].weight);
        costs[static_cast<size_t>(j)] = pool[static_cast<size_t>(j)].cost;
        for (int t : pool[static_cast<size_t>(j)].items)
            if (!gone[static_cast<size_t>(t)] && sizes[static_cast<size_t>(t)] < eps)
                b1[static_cast<size_t>(j)] += sizes[static_cast<size_t>(t)];
    }

    CumulatedMatrix cum = cumulated_matrix(pool, large, sizes, cfg.row_slack_c);
    RoundingInstance ri;
    ri.a = cum.entries;
    ri.delta = cum.deltas;
    ri.b = DenseMatrix(1, m);
    ri.b.a = b1;
    ri.mu = {1.0};
    ri.c = costs;
    ri.x = weights;
    Vec y = run_rounding(ri, cfg, derive_seed(seed, 1), "bpr");

    std::vector<Pattern> chosen;
    Vec chosen_space;
    double b1x = 0.0, b1y = 0.0;
    for (int j = 0; j < m; ++j) {
        b1x += b1[static_cast<size_t>(j)] * weights[static_cast<size_t>(j)];
        if (y[static_cast<size_t>(j)] < 0.5) continue;
        chosen.push_back(pool[static_cast<size_t>(j)]);
        chosen_space.push_back(b1[static_cast<size_t>(j)]);
        b1y += b1[static_cast<size_t>(j)];
    }

    ItemGroups groups = build_groups(sizes, large, eps);
    std::vector<RepairBin> extra =
        repair_large(chosen, large, groups, sizes, cfg.repair_log_budget);
    SlotAssignment asg = assign_items_to_slots(chosen, extra, large, true);
    if (!asg.ok)
        throw std::logic_error("packing: assignment failed after repair");
    for (int t : asg.rejected) out.rejected.push_back(t);

    // Small items: rejections chosen for them are honored, the rest fill the
    // reserved space of the chosen bins plus bought blanks when short.
    std::unordered_set<int> small_set(small.begin(), small.end());
    std::vector<char> small_rejected(static_cast<size_t>(n), 0);
    for (const Pattern& p : chosen)
        if (is_rejection(p) && small_set.count(p.items.front()))
            small_rejected[static_cast<size_t>(p.items.front())] = 1;
    std::vector<int> to_place;
    double need = 0.0;
    for (int t : small) {
        if (small_rejected[static_cast<size_t>(t)]) {
            out.rejected.push_back(t);
            continue;
        }
        to_place.push_back(t);
        need += sizes[static_cast<size_t>(t)];
    }

    Vec spaces;
    std::vector<int> owner;  // chosen index, -1 for bought blanks
    double avail = 0.0;
    for (size_t k = 0; k < chosen.size(); ++k) {
        if (is_rejection(chosen[k])) continue;
        spaces.push_back(chosen_space[k]);
        owner.push_back(static_cast<int>(k));
        avail += chosen_space[k];
    }
    int bought = 0;
    if (!to_place.empty() && need > avail + 1e-9) {
        // The drift between reserved space before and after rounding, plus
        // one, always covers the gap: the fractional side reserves at least
        // the full small volume.
        bought = static_cast<int>(std::ceil(std::abs(b1x - b1y))) + 1;
        for (int t = 0; t < bought; ++t) {
            spaces.push_back(1.0);
            owner.push_back(-1);
        }
    }
    SmallAssignment sa = assign_small_fractional(spaces, to_place, sizes);
    std::vector<std::vector<int>> ff = first_fit(sa.discarded, sizes);

    std::vector<std::vector<int>> small_in_chosen(chosen.size());
    std::vector<std::vector<int>> small_in_bought(static_cast<size_t>(bought));
    size_t bought_at = 0;
    for (size_t sp = 0; sp < spaces.size(); ++sp) {
        if (owner[sp] < 0)
            small_in_bought[bought_at++] = sa.per_space[sp];
        else
            small_in_chosen[static_cast<size_t>(owner[sp])] = sa.per_space[sp];
    }

    for (size_t k = 0; k < chosen.size(); ++k) {
        if (is_rejection(chosen[k])) continue;
        std::vector<int> items = asg.pattern_items[k];
        items.insert(items.end(), small_in_chosen[k].begin(), small_in_chosen[k].end());
        if (items.empty()) continue;  // bought nothing into it, drop the bin
        std::sort(items.begin(), items.end());
        out.bins.push_back(std::move(items));
        out.bin_notes.emplace_back("pattern");
    }
    for (size_t e = 0; e < extra.size(); ++e) {
        if (asg.extra_items[e].empty()) continue;
        out.bins.push_back(asg.extra_items[e]);
        out.bin_notes.emplace_back("repair");
        ++out.extra_bins;
    }
    for (auto& items : small_in_bought) {
        if (items.empty()) continue;
        out.bins.push_back(std::move(items));
        out.bin_notes.emplace_back("small");
        ++out.extra_bins;
    }
    for (auto& bin : ff) {
        out.bins.push_back(std::move(bin));
        out.bin_notes.emplace_back("discard");
        ++out.extra_bins;
    }
    std::sort(out.rejected.begin(), out.rejected.end());
    out.total_cost = static_cast<double>(out.bins.size());
    for (int t : out.rejected) out.total_cost += pi[static_cast<size_t>(t)];

    std::string err = check_packing(inst, out);
    if (!err.empty())
        throw std::logic_error("packing: self-check failed: " + err);
    return out;
}

PackingSolution solve_train(const PackingInstance& inst, const Config& cfg,
                            std::uint64_t seed) {
    require_kind(inst, false, "train");
    const int n = inst.n();
    const Vec& sizes = inst.sizes;
    const Vec& pos = inst.positions;

    PatternFamily family;
    family.n = n;
    family.min_cost = 1.0;
    for (double p : pos) family.min_cost = std::min(family.min_cost, p);
    family.oracle = [&sizes, &pos](const Vec& prices, double eps_prime) {
        return train_oracle(prices, sizes, pos, eps_prime);
    };
    SparseSolution frac = solve_pattern_lp(family, 1.0);

    PackingSolution out;
    out.lp_objective = frac.objective;
    const double optf = std::max(2.0, frac.objective);
    const double eps = std::pow(optf, -0.4);

    PackingInstance graded = well_round(inst, eps);
    const double lg = std::log1p(eps);
    const int t_grades =
        static_cast<int>(std::floor(std::log(1.0 / eps) / lg + 1e-9)) + 1;
    std::vector<int> grade_of(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        double g = graded.positions[static_cast<size_t>(i)];
        int j = static_cast<int>(std::lround(std::log(1.0 / g) / lg));
        grade_of[static_cast<size_t>(i)] = std::clamp(j, 0, t_grades - 1);
    }

    const int m = static_cast<int>(frac.entries.size());
    std::vector<Pattern> pool(static_cast<size_t>(m));
    Vec weights(static_cast<size_t>(m)), costs(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        pool[static_cast<size_t>(j)] = frac.entries[static_cast<size_t>(j)].pattern;
        weights[static_cast<size_t>(j)] =
            std::min(1.0, frac.entries[static_cast<size_t>(j)].weight);
        costs[static_cast<size_t>(j)] = pool[static_cast<size_t>(j)].cost;
    }

    std::vector<int> large, small;
    for (int i = 0; i < n; ++i)
        (sizes[static_cast<size_t>(i)] >= eps ? large : small).push_back(i);
    std::vector<std::vector<int>> domain(static_cast<size_t>(t_grades));
    for (int i : large) domain[static_cast<size_t>(grade_of[static_cast<size_t>(i)])].push_back(i);

    // Stacked per-position prefix rows, then one reserved-space row per
    // position with geometrically fading weights.
    DenseMatrix a(0, m);
    Vec deltas;
    for (int g = 0; g < t_grades; ++g) {
        CumulatedMatrix cum =
            cumulated_matrix(pool, domain[static_cast<size_t>(g)], sizes, cfg.row_slack_c);
        a.a.insert(a.a.end(), cum.entries.a.begin(), cum.entries.a.end());
        a.rows += cum.entries.rows;
        deltas.insert(deltas.end(), cum.deltas.begin(), cum.deltas.end());
    }
    DenseMatrix b(t_grades, m);
    Vec mu(static_cast<size_t>(t_grades));
    for (int g = 0; g < t_grades; ++g)
        mu[static_cast<size_t>(g)] = (eps / 5.0) * std::pow(1.0 + eps / 4.0, -g);
    for (int j = 0; j < m; ++j)
        for (int t : pool[static_cast<size_t>(j)].items)
            if (sizes[static_cast<size_t>(t)] < eps)
                b.at(grade_of[static_cast<size_t>(t)], j) += sizes[static_cast<size_t>(t)];

    RoundingInstance ri;
    ri.a = a;
    ri.delta = deltas;
    ri.b = b;
    ri.mu = mu;
    ri.c = costs;
    ri.x = weights;
    Vec y = run_rounding(ri, cfg, derive_seed(seed, 1), "train");

    std::vector<Pattern> chosen;
    std::vector<int> chosen_cols;
    Vec bx(static_cast<size_t>(t_grades), 0.0), by(static_cast<size_t>(t_grades), 0.0);
    for (int j = 0; j < m; ++j) {
        for (int g = 0; g < t_grades; ++g)
            bx[static_cast<size_t>(g)] += b.at(g, j) * weights[static_cast<size_t>(j)];
        if (y[static_cast<size_t>(j)] < 0.5) continue;
        chosen.push_back(pool[static_cast<size_t>(j)]);
        chosen_cols.push_back(j);
        for (int g = 0; g < t_grades; ++g) by[static_cast<size_t>(g)] += b.at(g, j);
    }

    std::vector<std::vector<int>> pattern_items(chosen.size());
    std::vector<std::vector<int>> extra_items;
    std::vector<std::pair<std::vector<int>, int>> bought_bins;  // items, grade
    std::vector<int> discarded_all;
    int repair_bins = 0;
    for (int g = 0; g < t_grades; ++g) {
        const std::vector<int>& dom = domain[static_cast<size_t>(g)];
        ItemGroups groups = build_groups(sizes, dom, eps);
        std::vector<RepairBin> ex =
            repair_large(chosen, dom, groups, sizes, cfg.repair_log_budget);
        for (RepairBin& rb : ex) rb.position_grade = g;
        SlotAssignment asg = assign_items_to_slots(chosen, ex, dom, false);
        if (!asg.ok)
            throw std::logic_error("packing: assignment failed after repair");
        for (size_t k = 0; k < chosen.size(); ++k)
            pattern_items[k].insert(pattern_items[k].end(), asg.pattern_items[k].begin(),
                                    asg.pattern_items[k].end());
        for (size_t e = 0; e < ex.size(); ++e) {
            extra_items.push_back(asg.extra_items[e]);
            ++repair_bins;
        }

        std::vector<int> to_place;
        double need = 0.0;
        for (int t : small)
            if (grade_of[static_cast<size_t>(t)] == g) {
                to_place.push_back(t);
                need += sizes[static_cast<size_t>(t)];
            }
        Vec spaces;
        std::vector<int> owner;
        double avail = 0.0;
        for (size_t k = 0; k < chosen.size(); ++k) {
            double spc = b.at(g, chosen_cols[k]);
            spaces.push_back(spc);
            owner.push_back(static_cast<int>(k));
            avail += spc;
        }
        int bought = 0;
        if (!to_place.empty() && need > avail + 1e-9)
            bought = static_cast<int>(
                         std::ceil(std::abs(bx[static_cast<size_t>(g)] -
                                            by[static_cast<size_t>(g)]))) +
                     1;
        for (int t = 0; t < bought; ++t) {
            spaces.push_back(1.0);
            owner.push_back(-1);
        }
        SmallAssignment sa = assign_small_fractional(spaces, to_place, sizes);
        for (size_t sp = 0; sp < spaces.size(); ++sp) {
            if (sa.per_space[sp].empty()) continue;
            if (owner[sp] >= 0) {
                auto& dst = pattern_items[static_cast<size_t>(owner[sp])];
                dst.insert(dst.end(), sa.per_space[sp].begin(), sa.per_space[sp].end());
            } else {
                bought_bins.emplace_back(sa.per_space[sp], g);
            }
        }
        discarded_all.insert(discarded_all.end(), sa.discarded.begin(), sa.discarded.end());
    }
    std::vector<std::vector<int>> ff = first_fit(discarded_all, sizes);

    for (size_t k = 0; k < chosen.size(); ++k) {
        if (pattern_items[k].empty()) continue;
        std::sort(pattern_items[k].begin(), pattern_items[k].end());
        out.bins.push_back(std::move(pattern_items[k]));
        out.bin_notes.emplace_back("pattern");
    }
    for (auto& items : extra_items) {
        if (items.empty()) continue;
        out.bins.push_back(std::move(items));
        out.bin_notes.emplace_back("repair");
        ++out.extra_bins;
    }
    for (auto& [items, grade] : bought_bins) {
        (void)grade;
        out.bins.push_back(items);
        out.bin_notes.emplace_back("small");
        ++out.extra_bins;
    }
    for (auto& bin : ff) {
        out.bins.push_back(std::move(bin));
        out.bin_notes.emplace_back("discard");
        ++out.extra_bins;
    }

    // Tours are paid by the farthest item actually on board, at its original
    // position; the graded positions only steered the rounding.
    for (const auto& bin : out.bins) {
        double far = 0.0;
        for (int t : bin) far = std::max(far, pos[static_cast<size_t>(t)]);
        out.total_cost += far;
    }

    std::string err = check_packing(inst, out);
    if (!err.empty())
        throw std::logic_error("packing: self-check failed: " + err);
    return out;
}

}  // namespace entroround
