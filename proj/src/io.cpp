#include "entroround/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "entroround/rng.hpp"

namespace entroround {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw std::runtime_error("load " + origin + ": " + what);
}

// Numeric field that may arrive as a JSON number or as a decimal string.
double as_number(const json& v, const std::string& field, const std::string& origin) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string& s = v.get_ref<const std::string&>();
        char* end = nullptr;
        double parsed = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            fail(origin, field + ": not a numeric string: \"" + s + "\"");
        return parsed;
    }
    fail(origin, field + ": expected a number or numeric string");
}

Vec number_array(const json& v, const std::string& field, const std::string& origin) {
    if (!v.is_array()) fail(origin, field + ": expected an array");
    Vec out;
    out.reserve(v.size());
    for (size_t k = 0; k < v.size(); ++k)
        out.push_back(as_number(v[k], field + "[" + std::to_string(k) + "]", origin));
    return out;
}

// Exact decimal string for v = num / 2^k (smallest k <= 20), empty when v is
// not on that grid. n / 2^k equals n * 5^k / 10^k, so the digits are n * 5^k
// left-padded to k places.
std::string dyadic_decimal(double v) {
    if (!(v > 0.0 && v <= 1.0)) return {};
    for (int k = 0; k <= 20; ++k) {
        double scaled = std::ldexp(v, k);
        if (scaled == std::floor(scaled)) {
            auto num = static_cast<unsigned long long>(scaled);
            if (k == 0) return std::to_string(num);
            unsigned long long pow5 = 1;
            for (int i = 0; i < k; ++i) pow5 *= 5;
            std::string digits = std::to_string(num * pow5);
            if (digits.size() < static_cast<size_t>(k))
                digits.insert(0, static_cast<size_t>(k) - digits.size(), '0');
            return "0." + digits;
        }
    }
    return {};
}

json value_array(const Vec& values, bool exact_decimals) {
    json arr = json::array();
    for (double v : values) {
        std::string exact = exact_decimals ? dyadic_decimal(v) : std::string{};
        if (!exact.empty())
            arr.push_back(exact);
        else
            arr.push_back(v);
    }
    return arr;
}

json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& ex) {
        fail(origin, ex.what());
    }
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("io: cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("io: cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("io: short write to " + path);
}

LoadedInstance parse_instance(const std::string& text, const std::string& origin) {
    json j = parse_text(text, origin);
    if (!j.is_object()) fail(origin, "top level must be an object");
    if (!j.contains("kind") || !j["kind"].is_string())
        fail(origin, "missing string field \"kind\"");

    LoadedInstance out;
    out.kind = j["kind"].get<std::string>();
    if (out.kind != "bp" && out.kind != "bpr" && out.kind != "train")
        fail(origin, "unknown kind \"" + out.kind + "\" (want bp, bpr or train)");

    if (!j.contains("sizes")) fail(origin, "missing field \"sizes\"");
    Vec sizes = number_array(j["sizes"], "sizes", origin);
    if (sizes.empty()) fail(origin, "sizes: need at least one item");
    for (size_t i = 0; i < sizes.size(); ++i)
        if (!(sizes[i] > 0.0 && sizes[i] <= 1.0))
            fail(origin, "sizes[" + std::to_string(i) + "]: out of range (0,1]");

    Vec costs, positions;
    if (j.contains("rejection_costs")) {
        if (out.kind != "bpr") fail(origin, "rejection_costs only valid for kind bpr");
        costs = number_array(j["rejection_costs"], "rejection_costs", origin);
    } else if (out.kind == "bpr") {
        fail(origin, "kind bpr needs rejection_costs");
    }
    if (j.contains("positions")) {
        if (out.kind != "train") fail(origin, "positions only valid for kind train");
        positions = number_array(j["positions"], "positions", origin);
    } else if (out.kind == "train") {
        fail(origin, "kind train needs positions");
    }
    if (!costs.empty() && costs.size() != sizes.size())
        fail(origin, "rejection_costs: length differs from sizes");
    if (!positions.empty() && positions.size() != sizes.size())
        fail(origin, "positions: length differs from sizes");
    for (size_t i = 0; i < costs.size(); ++i)
        if (!(costs[i] > 0.0 && costs[i] <= 1.0))
            fail(origin, "rejection_costs[" + std::to_string(i) + "]: out of range (0,1]");
    for (size_t i = 0; i < positions.size(); ++i)
        if (!(positions[i] > 0.0) || !std::isfinite(positions[i]))
            fail(origin, "positions[" + std::to_string(i) + "]: must be positive");

    out.order.resize(sizes.size());
    std::iota(out.order.begin(), out.order.end(), 0);
    if (!std::is_sorted(sizes.begin(), sizes.end(), std::greater<>())) {
        std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
            return sizes[static_cast<size_t>(a)] > sizes[static_cast<size_t>(b)];
        });
        Vec s2(sizes.size()), c2, p2;
        if (!costs.empty()) c2.resize(costs.size());
        if (!positions.empty()) p2.resize(positions.size());
        for (size_t k = 0; k < out.order.size(); ++k) {
            auto src = static_cast<size_t>(out.order[k]);
            s2[k] = sizes[src];
            if (!costs.empty()) c2[k] = costs[src];
            if (!positions.empty()) p2[k] = positions[src];
        }
        sizes = std::move(s2);
        costs = std::move(c2);
        positions = std::move(p2);
        out.notices.push_back("sizes sorted on load; order[] maps slots to input indices");
    }

    out.instance.sizes = std::move(sizes);
    out.instance.rejection_costs = std::move(costs);
    out.instance.positions = std::move(positions);
    out.instance.validate();
    return out;
}

LoadedInstance load_instance(const std::string& path) {
    return parse_instance(read_file(path), path);
}

std::string instance_to_json(const std::string& kind, const PackingInstance& inst,
                             bool exact_decimals) {
    json j;
    j["kind"] = kind;
    j["sizes"] = value_array(inst.sizes, exact_decimals);
    if (inst.has_rejection()) j["rejection_costs"] = value_array(inst.rejection_costs, false);
    if (inst.has_positions()) j["positions"] = value_array(inst.positions, exact_decimals);
    j["metadata"] = json::object();
    return j.dump(2) + "\n";
}

std::string solution_to_json(const PackingSolution& sol) {
    json j;
    j["bins"] = sol.bins;
    j["bin_notes"] = sol.bin_notes;
    j["rejected"] = sol.rejected;
    j["extra_bins"] = sol.extra_bins;
    j["total_cost"] = sol.total_cost;
    j["lp_objective"] = sol.lp_objective;
    return j.dump(2) + "\n";
}

PackingSolution parse_solution(const std::string& text, const std::string& origin) {
    json j = parse_text(text, origin);
    if (!j.is_object()) fail(origin, "top level must be an object");
    if (!j.contains("bins") || !j["bins"].is_array())
        fail(origin, "missing array field \"bins\"");

    PackingSolution sol;
    for (const json& bin : j["bins"]) {
        if (!bin.is_array()) fail(origin, "bins: expected arrays of item indices");
        std::vector<int> items;
        for (const json& v : bin) {
            if (!v.is_number_integer()) fail(origin, "bins: item indices must be integers");
            items.push_back(v.get<int>());
        }
        sol.bins.push_back(std::move(items));
    }
    if (j.contains("bin_notes"))
        sol.bin_notes = j["bin_notes"].get<std::vector<std::string>>();
    if (j.contains("rejected")) {
        for (const json& v : j["rejected"]) {
            if (!v.is_number_integer()) fail(origin, "rejected: indices must be integers");
            sol.rejected.push_back(v.get<int>());
        }
    }
    if (j.contains("extra_bins")) sol.extra_bins = j["extra_bins"].get<int>();
    if (j.contains("total_cost"))
        sol.total_cost = as_number(j["total_cost"], "total_cost", origin);
    if (j.contains("lp_objective"))
        sol.lp_objective = as_number(j["lp_objective"], "lp_objective", origin);
    return sol;
}

PackingSolution load_solution(const std::string& path) {
    return parse_solution(read_file(path), path);
}

std::string peek_kind(const std::string& text, const std::string& origin) {
    json j = parse_text(text, origin);
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        fail(origin, "missing string field \"kind\"");
    return j["kind"].get<std::string>();
}

namespace {

DenseMatrix matrix_field(const json& v, int cols, const std::string& field,
                         const std::string& origin) {
    if (!v.is_array()) fail(origin, field + ": expected an array of rows");
    DenseMatrix m(static_cast<int>(v.size()), cols);
    for (int i = 0; i < m.rows; ++i) {
        Vec row = number_array(v[static_cast<size_t>(i)],
                               field + "[" + std::to_string(i) + "]", origin);
        if (static_cast<int>(row.size()) != cols)
            fail(origin, field + "[" + std::to_string(i) + "]: expected " +
                             std::to_string(cols) + " entries");
        for (int jc = 0; jc < cols; ++jc) m.at(i, jc) = row[static_cast<size_t>(jc)];
    }
    return m;
}

json matrix_to_rows(const DenseMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int jc = 0; jc < m.cols; ++jc) row.push_back(m.at(i, jc));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

RoundingInstance parse_rounding_instance(const std::string& text,
                                         const std::string& origin) {
    json j = parse_text(text, origin);
    if (!j.is_object()) fail(origin, "top level must be an object");
    if (!j.contains("kind") || j["kind"] != "rounding")
        fail(origin, "kind is not \"rounding\"");
    if (!j.contains("x")) fail(origin, "missing field \"x\"");

    RoundingInstance inst;
    inst.x = number_array(j["x"], "x", origin);
    int cols = static_cast<int>(inst.x.size());
    if (cols < 1) fail(origin, "x: need at least one column");

    inst.a = j.contains("a") ? matrix_field(j["a"], cols, "a", origin)
                             : DenseMatrix(0, cols);
    inst.b = j.contains("b") ? matrix_field(j["b"], cols, "b", origin)
                             : DenseMatrix(0, cols);
    if (j.contains("delta")) inst.delta = number_array(j["delta"], "delta", origin);
    if (j.contains("mu")) inst.mu = number_array(j["mu"], "mu", origin);
    if (j.contains("c")) inst.c = number_array(j["c"], "c", origin);
    try {
        inst.validate();
    } catch (const std::exception& ex) {
        fail(origin, ex.what());
    }
    return inst;
}

RoundingInstance load_rounding_instance(const std::string& path) {
    return parse_rounding_instance(read_file(path), path);
}

std::string rounding_instance_to_json(const RoundingInstance& inst) {
    json j;
    j["kind"] = "rounding";
    j["a"] = matrix_to_rows(inst.a);
    j["delta"] = inst.delta;
    j["b"] = matrix_to_rows(inst.b);
    j["mu"] = inst.mu;
    if (!inst.c.empty()) j["c"] = inst.c;
    j["x"] = inst.x;
    j["metadata"] = json::object();
    return j.dump(2) + "\n";
}

PackingInstance generate_instance(const std::string& kind, int n, std::uint64_t seed,
                                  const std::string& dist) {
    if (n < 1) throw std::invalid_argument("generate_instance: n must be >= 1");
    if (kind != "bp" && kind != "bpr" && kind != "train")
        throw std::invalid_argument("generate_instance: unknown kind " + kind);

    Xoshiro256 rng(seed);
    PackingInstance inst;
    if (dist == "uniform") {
        for (int i = 0; i < n; ++i) inst.sizes.push_back(1.0 - rng.uniform01());
    } else if (dist == "dyadic") {
        for (int i = 0; i < n; ++i)
            inst.sizes.push_back(std::ldexp(1.0, -1 - static_cast<int>(rng.below(6))));
    } else if (dist == "clustered") {
        int groups = 2 + static_cast<int>(rng.below(3));
        Vec centers;
        for (int g = 0; g < groups; ++g) centers.push_back(0.1 + 0.8 * rng.uniform01());
        for (int i = 0; i < n; ++i) {
            double c = centers[rng.below(static_cast<std::uint64_t>(groups))];
            double s = c + 0.02 * (rng.uniform01() - 0.5);
            inst.sizes.push_back(std::clamp(s, 0.05, 1.0));
        }
    } else {
        throw std::invalid_argument("generate_instance: unknown distribution " + dist);
    }
    std::sort(inst.sizes.begin(), inst.sizes.end(), std::greater<>());

    if (kind == "bpr") {
        for (int i = 0; i < n; ++i) inst.rejection_costs.push_back(1.0 - rng.uniform01());
    } else if (kind == "train") {
        // Positions on the (1+eps) grade grid the well-rounding step uses.
        for (int i = 0; i < n; ++i)
            inst.positions.push_back(std::pow(1.1, -static_cast<double>(rng.below(25))));
    }
    inst.validate();
    return inst;
}

}  // namespace entroround
