#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orbitshift/char_poly.hpp"
#include "orbitshift/d_symbol.hpp"
#include "orbitshift/errors.hpp"
#include "orbitshift/foliation.hpp"
#include "orbitshift/random.hpp"
#include "orbitshift/shift.hpp"

namespace orbitshift {

// Exit codes shared by the library runner and the CLI.
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numeric = 3;

struct run_result {
    int exit_code = exit_ok;
    std::string output;  // full report, ready to write
};

namespace detail {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline std::string csv_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct grid_axis {
    double lo = 0.0;
    double hi = 0.0;
    int count = 1;

    double coordinate(int i) const {
        if (count == 1) return lo;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

struct scenario_data {
    int dim = 0;
    std::string task;
    std::vector<shift_stage> stages;
    flow_config cfg;
    std::vector<vec> points;
    std::vector<grid_axis> axes;
    bool oracle = false;
    std::uint64_t seed = 0;
    int pairs = 200;
    std::optional<leaf_map> map;
    std::string foliation_type;
    int leaf_dim = 0;
    std::optional<product_foliation> foliation;
};

// ---- validation ------------------------------------------------------------

class scenario_reader {
public:
    scenario_reader(const njson& j, std::vector<std::string>& issues)
        : j_(j), issues_(issues) {}

    std::optional<scenario_data> read() {
        if (!j_.is_object()) {
            fail("$", "scenario must be a JSON object");
            return std::nullopt;
        }
        read_schema();
        read_task();
        read_dim();
        // A bad task or dimension makes the remaining checks meaningless.
        if (data_.task.empty() || data_.dim == 0) return std::nullopt;

        check_allowed_keys();
        read_flow();
        if (data_.task == "verify-identities") {
            read_seed();
            read_pairs();
        } else if (data_.task == "decompose") {
            read_map();
            read_foliation();
            read_points(true);
        } else {
            read_stages();
            if (data_.task == "grid") read_grid();
            else read_points(true);
            if (data_.task == "classify" || data_.task == "grid" ||
                data_.task == "commutator")
                read_oracle();
        }
        if (!issues_.empty()) return std::nullopt;
        return std::move(data_);
    }

private:
    void fail(const std::string& path, const std::string& message) {
        issues_.push_back(path + ": " + message);
    }

    bool require_int(const njson& v, const std::string& path, long long lo,
                     long long hi, long long& out) {
        if (!v.is_number_integer()) {
            fail(path, "expected an integer");
            return false;
        }
        const auto n = v.get<long long>();
        if (n < lo || n > hi) {
            fail(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return false;
        }
        out = n;
        return true;
    }

    bool require_number(const njson& v, const std::string& path, double& out) {
        if (!v.is_number()) {
            fail(path, "expected a number");
            return false;
        }
        out = v.get<double>();
        if (!std::isfinite(out)) {
            fail(path, "must be finite");
            return false;
        }
        return true;
    }

    void read_schema() {
        if (!j_.contains("schema")) {
            fail("schema", "missing (expected 1)");
            return;
        }
        long long v = 0;
        if (require_int(j_.at("schema"), "schema", 1, 1, v)) {}
    }

    void read_task() {
        if (!j_.contains("task") || !j_.at("task").is_string()) {
            fail("task", "missing or not a string");
            return;
        }
        const auto t = j_.at("task").get<std::string>();
        static const char* known[] = {"apply",     "lambda",            "classify",
                                      "grid",      "verify-identities", "commutator",
                                      "decompose"};
        for (const char* k : known)
            if (t == k) {
                data_.task = t;
                return;
            }
        fail("task", "unknown task '" + t + "'");
    }

    void read_dim() {
        if (!j_.contains("dim")) {
            fail("dim", "missing");
            return;
        }
        long long v = 0;
        if (require_int(j_.at("dim"), "dim", 1, 64, v)) data_.dim = static_cast<int>(v);
    }

    void check_allowed_keys() {
        std::vector<std::string> allowed = {"schema", "dim", "task", "flow"};
        if (data_.task == "verify-identities") {
            allowed.push_back("seed");
            allowed.push_back("pairs");
        } else if (data_.task == "decompose") {
            allowed.push_back("map");
            allowed.push_back("foliation");
            allowed.push_back("points");
        } else {
            allowed.push_back("stages");
            allowed.push_back(data_.task == "grid" ? "grid" : "points");
            if (data_.task == "classify" || data_.task == "grid" ||
                data_.task == "commutator")
                allowed.push_back("oracle");
        }
        for (const auto& item : j_.items()) {
            bool ok = false;
            for (const std::string& k : allowed)
                if (item.key() == k) ok = true;
            if (!ok)
                fail(item.key(), "unknown field for task '" + data_.task + "'");
        }
    }

    void read_flow() {
        if (!j_.contains("flow")) return;
        const njson& f = j_.at("flow");
        if (!f.is_object()) {
            fail("flow", "expected an object");
            return;
        }
        for (const auto& item : f.items()) {
            const std::string& k = item.key();
            if (k != "step" && k != "max_time" && k != "radius" && k != "method")
                fail("flow." + k, "unknown field");
        }
        double v = 0.0;
        if (f.contains("step") && require_number(f.at("step"), "flow.step", v)) {
            if (v <= 0.0) fail("flow.step", "must be positive");
            else data_.cfg.rk4_step = v;
        }
        if (f.contains("max_time") && require_number(f.at("max_time"), "flow.max_time", v)) {
            if (v <= 0.0) fail("flow.max_time", "must be positive");
            else data_.cfg.max_time = v;
        }
        if (f.contains("radius") && require_number(f.at("radius"), "flow.radius", v)) {
            if (v <= 0.0) fail("flow.radius", "must be positive");
            else data_.cfg.domain_radius = v;
        }
        if (f.contains("method")) {
            if (!f.at("method").is_string()) {
                fail("flow.method", "expected \"exact\" or \"rk4\"");
            } else {
                const auto m = f.at("method").get<std::string>();
                if (m == "exact") data_.cfg.method = flow_method::exact_if_possible;
                else if (m == "rk4") data_.cfg.method = flow_method::rk4;
                else fail("flow.method", "expected \"exact\" or \"rk4\"");
            }
        }
    }

    std::optional<vec> read_point(const njson& v, const std::string& path) {
        if (!v.is_array() || v.size() != static_cast<std::size_t>(data_.dim)) {
            fail(path, "expected an array of " + std::to_string(data_.dim) + " numbers");
            return std::nullopt;
        }
        vec p(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!require_number(v.at(i), path + "[" + std::to_string(i) + "]", p[i]))
                return std::nullopt;
        return p;
    }

    void read_points(bool required) {
        if (!j_.contains("points")) {
            if (required) fail("points", "missing");
            return;
        }
        const njson& pts = j_.at("points");
        if (!pts.is_array() || pts.empty()) {
            fail("points", "expected a non-empty array of points");
            return;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto p = read_point(pts.at(i), "points[" + std::to_string(i) + "]");
            if (p) data_.points.push_back(std::move(*p));
        }
    }

    std::optional<matrix> read_matrix(const njson& v, const std::string& path, int n) {
        if (!v.is_array() || v.size() != static_cast<std::size_t>(n)) {
            fail(path, "expected " + std::to_string(n) + " rows");
            return std::nullopt;
        }
        matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (std::size_t r = 0; r < v.size(); ++r) {
            const njson& row = v.at(r);
            const std::string rpath = path + "[" + std::to_string(r) + "]";
            if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) {
                fail(rpath, "expected " + std::to_string(n) + " numbers");
                return std::nullopt;
            }
            for (std::size_t c = 0; c < row.size(); ++c) {
                double x = 0.0;
                if (!require_number(row.at(c), rpath + "[" + std::to_string(c) + "]", x))
                    return std::nullopt;
                m(r, c) = x;
            }
        }
        return m;
    }

    std::optional<vector_field> read_field(const njson& v, const std::string& path,
                                           int dim) {
        if (!v.is_object() || !v.contains("kind") || !v.at("kind").is_string()) {
            fail(path, "expected an object with a \"kind\" string");
            return std::nullopt;
        }
        const auto kind = v.at("kind").get<std::string>();
        auto check_keys = [&](std::initializer_list<const char*> extra) {
            for (const auto& item : v.items()) {
                if (item.key() == "kind") continue;
                bool ok = false;
                for (const char* e : extra)
                    if (item.key() == e) ok = true;
                if (!ok) fail(path + "." + item.key(), "unknown field");
            }
        };
        if (kind == "zero") {
            check_keys({});
            return vector_field::zero(dim);
        }
        if (kind == "translation") {
            check_keys({"direction"});
            if (!v.contains("direction")) {
                fail(path + ".direction", "missing");
                return std::nullopt;
            }
            auto d = read_point(v.at("direction"), path + ".direction");
            if (!d) return std::nullopt;
            return vector_field::translation(std::move(*d));
        }
        if (kind == "linear") {
            check_keys({"matrix"});
            if (!v.contains("matrix")) {
                fail(path + ".matrix", "missing");
                return std::nullopt;
            }
            auto m = read_matrix(v.at("matrix"), path + ".matrix", dim);
            if (!m) return std::nullopt;
            return vector_field::linear(std::move(*m));
        }
        if (kind == "expression") {
            check_keys({"components"});
            if (!v.contains("components") || !v.at("components").is_array() ||
                v.at("components").size() != static_cast<std::size_t>(dim)) {
                fail(path + ".components",
                     "expected " + std::to_string(dim) + " expression strings");
                return std::nullopt;
            }
            std::vector<expr_ptr> comps;
            bool ok = true;
            for (std::size_t i = 0; i < v.at("components").size(); ++i) {
                const njson& c = v.at("components").at(i);
                const std::string cpath = path + ".components[" + std::to_string(i) + "]";
                if (!c.is_string()) {
                    fail(cpath, "expected an expression string");
                    ok = false;
                    continue;
                }
                try {
                    comps.push_back(parse_expr(c.get<std::string>(), dim));
                } catch (const parse_error& e) {
                    fail(cpath, e.what());
                    ok = false;
                }
            }
            if (!ok) return std::nullopt;
            return vector_field::expression(dim, std::move(comps));
        }
        fail(path + ".kind", "unknown field kind '" + kind + "'");
        return std::nullopt;
    }

    void read_stages() {
        if (!j_.contains("stages")) {
            fail("stages", "missing");
            return;
        }
        const njson& st = j_.at("stages");
        if (!st.is_array() || st.empty()) {
            fail("stages", "expected a non-empty array");
            return;
        }
        if (data_.task == "commutator" && st.size() != 2) {
            fail("stages", "commutator takes exactly 2 stages");
            return;
        }
        for (std::size_t i = 0; i < st.size(); ++i) {
            const njson& s = st.at(i);
            const std::string spath = "stages[" + std::to_string(i) + "]";
            if (!s.is_object()) {
                fail(spath, "expected an object");
                continue;
            }
            for (const auto& item : s.items())
                if (item.key() != "field" && item.key() != "func")
                    fail(spath + "." + item.key(), "unknown field");
            if (!s.contains("field")) {
                fail(spath + ".field", "missing");
                continue;
            }
            auto field = read_field(s.at("field"), spath + ".field", data_.dim);
            if (!s.contains("func") || !s.at("func").is_string()) {
                fail(spath + ".func", "missing or not a string");
                continue;
            }
            std::optional<scalar_field> func;
            try {
                func.emplace(data_.dim, s.at("func").get<std::string>());
            } catch (const parse_error& e) {
                fail(spath + ".func", e.what());
            }
            if (field && func) data_.stages.push_back({std::move(*field), std::move(*func)});
        }
    }

    void read_grid() {
        if (!j_.contains("grid")) {
            fail("grid", "missing");
            return;
        }
        const njson& g = j_.at("grid");
        if (!g.is_object() || !g.contains("axes")) {
            fail("grid", "expected an object with \"axes\"");
            return;
        }
        for (const auto& item : g.items())
            if (item.key() != "axes") fail("grid." + item.key(), "unknown field");
        const njson& axes = g.at("axes");
        if (!axes.is_array() || axes.size() != static_cast<std::size_t>(data_.dim)) {
            fail("grid.axes", "expected one axis per dimension");
            return;
        }
        double total = 1.0;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const njson& a = axes.at(i);
            const std::string apath = "grid.axes[" + std::to_string(i) + "]";
            if (!a.is_object()) {
                fail(apath, "expected an object {min, max, count}");
                continue;
            }
            for (const auto& item : a.items())
                if (item.key() != "min" && item.key() != "max" && item.key() != "count")
                    fail(apath + "." + item.key(), "unknown field");
            grid_axis axis;
            bool ok = a.contains("min") && require_number(a.at("min"), apath + ".min", axis.lo);
            ok = a.contains("max") && require_number(a.at("max"), apath + ".max", axis.hi) && ok;
            long long cnt = 0;
            ok = a.contains("count") && require_int(a.at("count"), apath + ".count", 1, 1000000, cnt) && ok;
            if (!a.contains("min")) fail(apath + ".min", "missing");
            if (!a.contains("max")) fail(apath + ".max", "missing");
            if (!a.contains("count")) fail(apath + ".count", "missing");
            if (!ok) continue;
            if (axis.lo > axis.hi) {
                fail(apath, "min must not exceed max");
                continue;
            }
            axis.count = static_cast<int>(cnt);
            total *= static_cast<double>(axis.count);
            data_.axes.push_back(axis);
        }
        if (total > 1e6) fail("grid", "more than 1e6 grid points");
    }

    void read_oracle() {
        if (!j_.contains("oracle")) return;
        if (!j_.at("oracle").is_boolean()) {
            fail("oracle", "expected a boolean");
            return;
        }
        data_.oracle = j_.at("oracle").get<bool>();
    }

    void read_seed() {
        if (!j_.contains("seed")) {
            fail("seed", "missing (verify-identities is seeded)");
            return;
        }
        long long v = 0;
        if (require_int(j_.at("seed"), "seed", 0, 9007199254740992LL, v))
            data_.seed = static_cast<std::uint64_t>(v);
    }

    void read_pairs() {
        if (!j_.contains("pairs")) return;
        long long v = 0;
        if (require_int(j_.at("pairs"), "pairs", 1, 100000, v))
            data_.pairs = static_cast<int>(v);
    }

    void read_map() {
        if (!j_.contains("map")) {
            fail("map", "missing");
            return;
        }
        const njson& m = j_.at("map");
        if (!m.is_array() || m.size() != static_cast<std::size_t>(data_.dim)) {
            fail("map", "expected " + std::to_string(data_.dim) + " expression strings");
            return;
        }
        std::vector<scalar_field> comps;
        bool ok = true;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string mpath = "map[" + std::to_string(i) + "]";
            if (!m.at(i).is_string()) {
                fail(mpath, "expected an expression string");
                ok = false;
                continue;
            }
            try {
                comps.emplace_back(data_.dim, m.at(i).get<std::string>());
            } catch (const parse_error& e) {
                fail(mpath, e.what());
                ok = false;
            }
        }
        if (ok) data_.map.emplace(data_.dim, std::move(comps));
    }

    void read_foliation() {
        if (!j_.contains("foliation")) {
            fail("foliation", "missing");
            return;
        }
        const njson& f = j_.at("foliation");
        if (!f.is_object() || !f.contains("type") || !f.at("type").is_string()) {
            fail("foliation", "expected an object with a \"type\" string");
            return;
        }
        const auto type = f.at("type").get<std::string>();
        if (type == "translation") {
            for (const auto& item : f.items())
                if (item.key() != "type" && item.key() != "leaf_dim")
                    fail("foliation." + item.key(), "unknown field");
            if (!f.contains("leaf_dim")) {
                fail("foliation.leaf_dim", "missing");
                return;
            }
            long long v = 0;
            if (!require_int(f.at("leaf_dim"), "foliation.leaf_dim", 1, data_.dim, v)) return;
            data_.foliation_type = type;
            data_.leaf_dim = static_cast<int>(v);
            return;
        }
        if (type == "product") {
            for (const auto& item : f.items())
                if (item.key() != "type" && item.key() != "blocks")
                    fail("foliation." + item.key(), "unknown field");
            if (!f.contains("blocks") || !f.at("blocks").is_array() ||
                f.at("blocks").empty()) {
                fail("foliation.blocks", "expected a non-empty array");
                return;
            }
            std::vector<foliation_block> blocks;
            bool ok = true;
            int total = 0;
            const njson& bl = f.at("blocks");
            for (std::size_t i = 0; i < bl.size(); ++i) {
                const njson& b = bl.at(i);
                const std::string bpath = "foliation.blocks[" + std::to_string(i) + "]";
                if (!b.is_object() || !b.contains("dim") || !b.contains("field")) {
                    fail(bpath, "expected an object {dim, field}");
                    ok = false;
                    continue;
                }
                for (const auto& item : b.items())
                    if (item.key() != "dim" && item.key() != "field")
                        fail(bpath + "." + item.key(), "unknown field");
                long long d = 0;
                if (!require_int(b.at("dim"), bpath + ".dim", 0, data_.dim, d)) {
                    ok = false;
                    continue;
                }
                foliation_block blk;
                blk.dim = static_cast<int>(d);
                total += blk.dim;
                const njson& bf = b.at("field");
                const std::string fpath = bpath + ".field";
                if (!bf.is_object() || !bf.contains("kind") || !bf.at("kind").is_string()) {
                    fail(fpath, "expected an object with a \"kind\" string");
                    ok = false;
                    continue;
                }
                const auto kind = bf.at("kind").get<std::string>();
                if (kind == "zero") {
                    blk.kind = field_kind::zero;
                    for (const auto& item : bf.items())
                        if (item.key() != "kind") fail(fpath + "." + item.key(), "unknown field");
                } else if (kind == "translation") {
                    blk.kind = field_kind::translation;
                    for (const auto& item : bf.items())
                        if (item.key() != "kind" && item.key() != "axis")
                            fail(fpath + "." + item.key(), "unknown field");
                    long long axis = 0;
                    if (!bf.contains("axis") ||
                        !require_int(bf.at("axis"), fpath + ".axis", 1,
                                     std::max(blk.dim, 1), axis)) {
                        if (!bf.contains("axis")) fail(fpath + ".axis", "missing (1-based within the block)");
                        ok = false;
                        continue;
                    }
                    blk.translation_axis = static_cast<int>(axis) - 1;
                } else if (kind == "linear") {
                    blk.kind = field_kind::linear;
                    for (const auto& item : bf.items())
                        if (item.key() != "kind" && item.key() != "matrix")
                            fail(fpath + "." + item.key(), "unknown field");
                    if (!bf.contains("matrix")) {
                        fail(fpath + ".matrix", "missing");
                        ok = false;
                        continue;
                    }
                    auto m = read_matrix(bf.at("matrix"), fpath + ".matrix", blk.dim);
                    if (!m) {
                        ok = false;
                        continue;
                    }
                    blk.coefficient = std::move(*m);
                } else {
                    fail(fpath + ".kind", "unknown block field kind '" + kind + "'");
                    ok = false;
                    continue;
                }
                if (blk.dim == 0 && blk.kind != field_kind::zero) {
                    fail(bpath, "a 0-dimensional block carries the zero field");
                    ok = false;
                    continue;
                }
                blocks.push_back(std::move(blk));
            }
            if (total != data_.dim)
                fail("foliation.blocks", "block dims sum to " + std::to_string(total) +
                                             ", expected " + std::to_string(data_.dim));
            else if (ok) {
                data_.foliation_type = type;
                data_.foliation.emplace(std::move(blocks));
            }
            return;
        }
        fail("foliation.type", "expected \"translation\" or \"product\"");
    }

    const njson& j_;
    std::vector<std::string>& issues_;
    scenario_data data_;
};

// ---- execution -------------------------------------------------------------

struct point_record {
    vec point;
    vec image;                // apply
    double lambda = 0.0;      // lambda/classify/grid/commutator
    double residual = 0.0;
    std::string verdict;      // classify/grid/commutator
    bool has_oracle = false;
    double fd_det = 0.0;
    double oracle_residual = 0.0;
    vec alphas;               // decompose
    double roundtrip = 0.0;   // decompose
};

struct pair_record {
    int pair = 0;
    int m = 0;
    int n = 0;
    bool rank_deficient = false;
    double det_residual = 0.0;
    double det_tol = 0.0;
    double charpoly_residual = 0.0;
    double charpoly_tol = 0.0;
    bool ok = true;
};

struct report_data {
    std::string task;
    int dim = 0;
    std::vector<point_record> records;
    std::vector<pair_record> pairs;
    ojson summary;                      // verify-identities
    std::vector<std::string> alphas;    // decompose: printed shift functions ("" = numeric)
    std::vector<std::string> notes;     // decompose
    bool all_ok = true;
};

inline point_record classify_record(const shift_spec& spec, const vec& x, bool oracle) {
    point_record rec;
    rec.point = x;
    const classification_report r = classify_point(spec, x, oracle);
    rec.lambda = r.lambda;
    rec.residual = r.cross_residual;
    rec.verdict = to_string(r.verdict);
    rec.has_oracle = r.has_oracle;
    rec.fd_det = r.fd_jacobian_det;
    rec.oracle_residual = r.oracle_residual;
    return rec;
}

inline void run_point_task(const scenario_data& s, report_data& out) {
    shift_spec spec = (s.task == "commutator")
                          ? build_commutator(s.stages[0].field, s.stages[0].func,
                                             s.stages[1].field, s.stages[1].func, s.cfg)
                          : shift_spec(s.stages, s.cfg);
    for (const vec& x : s.points) {
        point_record rec;
        if (s.task == "apply") {
            rec.point = x;
            rec.image = apply_shift(spec, x);
        } else if (s.task == "lambda") {
            rec.point = x;
            const lambda_result r = lambda_functional(spec, x);
            rec.lambda = r.value;
            rec.residual = r.cross_residual;
        } else {
            rec = classify_record(spec, x, s.oracle);
        }
        out.records.push_back(std::move(rec));
    }
}

inline void run_grid_task(const scenario_data& s, report_data& out) {
    const shift_spec spec(s.stages, s.cfg);
    const std::size_t m = s.axes.size();
    std::vector<int> idx(m, 0);
    vec x(m, 0.0);
    for (;;) {
        for (std::size_t a = 0; a < m; ++a)
            x[a] = s.axes[a].coordinate(idx[a]);
        out.records.push_back(classify_record(spec, x, s.oracle));
        // odometer, last axis fastest: records are ordered lexicographically
        std::size_t a = m;
        while (a-- > 0) {
            if (++idx[a] < s.axes[a].count) break;
            idx[a] = 0;
            if (a == 0) return;
        }
        if (a == static_cast<std::size_t>(-1)) return;
    }
}

inline matrix sample_matrix(rng64& rng, int rows, int cols, bool rank_deficient) {
    matrix a(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), 0.0);
    if (!rank_deficient) {
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = rng.uniform(-1.0, 1.0);
        return a;
    }
    // Rank at most min(rows, cols) - 1, as a short sum of outer products.
    const int rank = rng.uniform_int(0, std::min(rows, cols) - 1);
    for (int r = 0; r < rank; ++r) {
        vec u(static_cast<std::size_t>(rows)), v(static_cast<std::size_t>(cols));
        for (double& e : u) e = rng.uniform(-1.0, 1.0);
        for (double& e : v) e = rng.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += u[i] * v[j];
    }
    return a;
}

inline void run_verify_task(const scenario_data& s, report_data& out) {
    rng64 rng(s.seed);
    int deficient = 0;
    double max_det = 0.0, max_cp = 0.0;
    for (int k = 0; k < s.pairs; ++k) {
        pair_record rec;
        rec.pair = k;
        rec.m = rng.uniform_int(1, s.dim);
        rec.n = rng.uniform_int(1, s.dim);
        rec.rank_deficient = (k % 5 == 4);
        deficient += rec.rank_deficient ? 1 : 0;
        const matrix a = sample_matrix(rng, rec.m, rec.n, rec.rank_deficient);
        const matrix b = sample_matrix(rng, rec.m, rec.n, rec.rank_deficient);

        matrix em = matrix::identity(static_cast<std::size_t>(rec.m));
        em = em + a * transpose(b);
        matrix en = matrix::identity(static_cast<std::size_t>(rec.n));
        en = en + transpose(a) * b;
        rec.det_residual = std::abs(det(em) - det(en));
        rec.charpoly_residual = verify_product_char_identity(a, b);

        const double scale = 1.0 + frobenius_norm(a) * frobenius_norm(b);
        rec.det_tol = std::max(1e-12, 1e-9 * scale);
        rec.charpoly_tol = rec.det_tol;
        rec.ok = rec.det_residual <= rec.det_tol && rec.charpoly_residual <= rec.charpoly_tol;
        out.all_ok = out.all_ok && rec.ok;
        max_det = std::max(max_det, rec.det_residual);
        max_cp = std::max(max_cp, rec.charpoly_residual);
        out.pairs.push_back(rec);
    }
    out.summary["pairs"] = s.pairs;
    out.summary["rank_deficient_pairs"] = deficient;
    out.summary["max_det_residual"] = max_det;
    out.summary["max_charpoly_residual"] = max_cp;
    out.summary["all_ok"] = out.all_ok;
}

inline void run_decompose_task(const scenario_data& s, report_data& out) {
    const leaf_map& f = *s.map;
    std::vector<scalar_field> funcs;
    std::vector<vector_field> fields;
    if (s.foliation_type == "translation") {
        funcs = decompose_translation(f, s.leaf_dim);
        fields = translation_frame(s.dim, s.leaf_dim);
    } else {
        product_decomposition dec = decompose_product(f, *s.foliation, s.cfg);
        out.notes = dec.block_notes;
        funcs = std::move(dec.shift_functions);
        for (std::size_t b = 0; b < s.foliation->block_count(); ++b)
            fields.push_back(s.foliation->embedded_field(b));
    }
    for (const scalar_field& a : funcs)
        out.alphas.push_back(a.is_expression() ? to_string(a.body()) : std::string());

    std::vector<shift_stage> stages;
    for (std::size_t i = 0; i < funcs.size(); ++i) stages.push_back({fields[i], funcs[i]});
    const shift_spec spec(std::move(stages), s.cfg);

    for (const vec& x : s.points) {
        point_record rec;
        rec.point = x;
        for (const shift_stage& st : spec.stages())
            rec.alphas.push_back(st.func.value(x));
        const vec y = apply_shift(spec, x);
        const vec target = f.value(x);
        double err2 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            err2 += (y[i] - target[i]) * (y[i] - target[i]);
        rec.roundtrip = std::sqrt(err2);
        out.records.push_back(std::move(rec));
    }
}

// ---- serialization ---------------------------------------------------------

inline ojson to_json(const report_data& r) {
    ojson root;
    root["schema"] = 1;
    root["task"] = r.task;
    if (r.task == "verify-identities") {
        ojson records = ojson::array();
        for (const pair_record& p : r.pairs) {
            ojson rec;
            rec["pair"] = p.pair;
            rec["m"] = p.m;
            rec["n"] = p.n;
            rec["rank_deficient"] = p.rank_deficient;
            rec["det_residual"] = p.det_residual;
            rec["det_tol"] = p.det_tol;
            rec["charpoly_residual"] = p.charpoly_residual;
            rec["charpoly_tol"] = p.charpoly_tol;
            rec["ok"] = p.ok;
            records.push_back(std::move(rec));
        }
        root["records"] = std::move(records);
        root["summary"] = r.summary;
        return root;
    }
    if (!r.alphas.empty()) {
        ojson alphas = ojson::array();
        for (const std::string& a : r.alphas) {
            if (a.empty()) alphas.push_back(nullptr);
            else alphas.push_back(a);
        }
        root["shift_functions"] = std::move(alphas);
    }
    if (!r.notes.empty()) root["notes"] = r.notes;
    ojson records = ojson::array();
    for (const point_record& p : r.records) {
        ojson rec;
        rec["point"] = p.point;
        if (r.task == "apply") {
            rec["image"] = p.image;
        } else if (r.task == "lambda") {
            rec["lambda"] = p.lambda;
            rec["cross_residual"] = p.residual;
        } else if (r.task == "decompose") {
            rec["alpha"] = p.alphas;
            rec["roundtrip_error"] = p.roundtrip;
        } else {
            rec["lambda"] = p.lambda;
            rec["cross_residual"] = p.residual;
            rec["verdict"] = p.verdict;
            if (p.has_oracle) {
                rec["fd_jacobian_det"] = p.fd_det;
                rec["oracle_residual"] = p.oracle_residual;
            }
        }
        records.push_back(std::move(rec));
    }
    root["records"] = std::move(records);
    return root;
}

inline std::string to_csv(const report_data& r) {
    std::string s;
    auto add_row = [&s](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };

    std::vector<std::string> header;
    if (r.task == "verify-identities") {
        header = {"pair", "m", "n", "rank_deficient", "det_residual", "det_tol",
                  "charpoly_residual", "charpoly_tol", "ok"};
        add_row(header);
        for (const pair_record& p : r.pairs)
            add_row({std::to_string(p.pair), std::to_string(p.m), std::to_string(p.n),
                     p.rank_deficient ? "true" : "false", csv_double(p.det_residual),
                     csv_double(p.det_tol), csv_double(p.charpoly_residual),
                     csv_double(p.charpoly_tol), p.ok ? "true" : "false"});
        return s;
    }

    for (int i = 1; i <= r.dim; ++i) header.push_back("x" + std::to_string(i));
    if (r.task == "apply") {
        for (int i = 1; i <= r.dim; ++i) header.push_back("y" + std::to_string(i));
    } else if (r.task == "lambda") {
        header.push_back("lambda");
        header.push_back("residual");
    } else if (r.task == "decompose") {
        for (std::size_t i = 1; i <= r.alphas.size(); ++i)
            header.push_back("alpha" + std::to_string(i));
        header.push_back("roundtrip_error");
    } else {
        header.push_back("lambda");
        header.push_back("residual");
        header.push_back("verdict");
        const bool oracle = !r.records.empty() && r.records.front().has_oracle;
        if (oracle) {
            header.push_back("fd_det");
            header.push_back("oracle_residual");
        }
    }
    add_row(header);

    for (const point_record& p : r.records) {
        std::vector<std::string> cells;
        for (double v : p.point) cells.push_back(csv_double(v));
        if (r.task == "apply") {
            for (double v : p.image) cells.push_back(csv_double(v));
        } else if (r.task == "lambda") {
            cells.push_back(csv_double(p.lambda));
            cells.push_back(csv_double(p.residual));
        } else if (r.task == "decompose") {
            for (double v : p.alphas) cells.push_back(csv_double(v));
            cells.push_back(csv_double(p.roundtrip));
        } else {
            cells.push_back(csv_double(p.lambda));
            cells.push_back(csv_double(p.residual));
            cells.push_back(p.verdict);
            if (p.has_oracle) {
                cells.push_back(csv_double(p.fd_det));
                cells.push_back(csv_double(p.oracle_residual));
            }
        }
        add_row(cells);
    }
    return s;
}

inline std::string error_output(const std::string& kind,
                                const std::vector<std::string>& issues) {
    ojson root;
    root["error"]["kind"] = kind;
    root["error"]["issues"] = issues;
    return root.dump(2) + "\n";
}

inline std::string numeric_error_output(const std::string& message) {
    ojson root;
    root["error"]["kind"] = "numeric";
    root["error"]["message"] = message;
    return root.dump(2) + "\n";
}

}  // namespace detail

// Run a scenario given as JSON text.  format_override: "", "json" or "csv".
// Validation problems exit 2 with an issue list; numeric failures exit 3 with
// a structured error record (always JSON).  Successful output is byte-stable
// for a fixed scenario and format.
inline run_result run_scenario_text(const std::string& text,
                                    const std::string& format_override = "") {
    std::vector<std::string> issues;
    if (!format_override.empty() && format_override != "json" && format_override != "csv")
        issues.push_back("--format: expected json or csv");

    detail::njson parsed;
    try {
        parsed = detail::njson::parse(text);
    } catch (const std::exception& e) {
        issues.push_back(std::string("invalid JSON: ") + e.what());
    }
    std::optional<detail::scenario_data> data;
    if (issues.empty()) {
        detail::scenario_reader reader(parsed, issues);
        data = reader.read();
    }
    if (!issues.empty())
        return {exit_validation, detail::error_output("validation", issues)};

    detail::report_data report;
    report.task = data->task;
    report.dim = data->dim;
    try {
        if (data->task == "verify-identities") detail::run_verify_task(*data, report);
        else if (data->task == "grid") detail::run_grid_task(*data, report);
        else if (data->task == "decompose") detail::run_decompose_task(*data, report);
        else detail::run_point_task(*data, report);
    } catch (const error& e) {
        return {exit_numeric, detail::numeric_error_output(e.what())};
    }

    const std::string format = format_override.empty() ? "json" : format_override;
    std::string out = (format == "csv") ? detail::to_csv(report)
                                        : detail::to_json(report).dump(2) + "\n";
    return {report.all_ok ? exit_ok : exit_numeric, std::move(out)};
}

inline run_result run_scenario_file(const std::string& path,
                                    const std::string& format_override = "") {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return {exit_validation,
                detail::error_output("validation",
                                     {"cannot read scenario file '" + path + "'"})};
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_scenario_text(buf.str(), format_override);
}

}  // namespace orbitshift
