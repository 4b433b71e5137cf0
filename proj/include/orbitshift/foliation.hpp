#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitshift/errors.hpp"
#include "orbitshift/field.hpp"
#include "orbitshift/flow.hpp"
#include "orbitshift/matrix_exp.hpp"
#include "orbitshift/random.hpp"
#include "orbitshift/shift.hpp"

namespace orbitshift {

// Map f: R^m -> R^m given componentwise.
class leaf_map {
public:
    leaf_map(int ambient_dim, std::vector<scalar_field> components)
        : dim_(ambient_dim), components_(std::move(components)) {
        if (dim_ < 1) throw dimension_error("leaf_map: ambient_dim must be >= 1");
        if (components_.size() != static_cast<std::size_t>(dim_))
            throw dimension_error("leaf_map: need one component per coordinate");
        for (const scalar_field& c : components_)
            if (c.ambient_dim() != dim_)
                throw dimension_error("leaf_map: component dimension mismatch");
    }

    static leaf_map parse(int ambient_dim, const std::vector<std::string>& sources) {
        std::vector<scalar_field> components;
        components.reserve(sources.size());
        for (const std::string& s : sources) components.emplace_back(ambient_dim, s);
        return leaf_map(ambient_dim, std::move(components));
    }

    int ambient_dim() const noexcept { return dim_; }
    const std::vector<scalar_field>& components() const noexcept { return components_; }

    vec value(const vec& x) const {
        vec y(static_cast<std::size_t>(dim_));
        for (std::size_t i = 0; i < components_.size(); ++i)
            y[i] = components_[i].value(x);
        return y;
    }

    // J_ij = d f_i / d x_j.
    matrix jacobian(const vec& x) const {
        matrix j(static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const vec g = components_[i].gradient(x);
            for (std::size_t c = 0; c < g.size(); ++c) j(i, c) = g[c];
        }
        return j;
    }

private:
    int dim_;
    std::vector<scalar_field> components_;
};

struct sample_grid_cfg {
    int per_axis = 11;    // tensor grid for m <= 3; cloud size per_axis^3 beyond
    double extent = 1.0;  // samples live in [-extent, extent]^m
};

namespace detail {

// Deterministic check points: a tensor grid in low dimension, a seeded
// uniform cloud of the same cardinality once a grid would blow up.
inline std::vector<vec> sample_points(int m, const sample_grid_cfg& cfg) {
    if (cfg.per_axis < 2 || cfg.extent <= 0.0)
        throw domain_error("sample_grid_cfg: per_axis >= 2 and extent > 0 required");
    std::vector<vec> pts;
    if (m <= 3) {
        const int total = m == 1 ? cfg.per_axis
                                 : (m == 2 ? cfg.per_axis * cfg.per_axis
                                           : cfg.per_axis * cfg.per_axis * cfg.per_axis);
        pts.reserve(static_cast<std::size_t>(total));
        vec p(static_cast<std::size_t>(m), 0.0);
        std::vector<int> idx(static_cast<std::size_t>(m), 0);
        for (;;) {
            for (int a = 0; a < m; ++a)
                p[static_cast<std::size_t>(a)] =
                    -cfg.extent + 2.0 * cfg.extent * idx[static_cast<std::size_t>(a)] /
                                      (cfg.per_axis - 1);
            pts.push_back(p);
            int a = m - 1;
            while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == cfg.per_axis) {
                idx[static_cast<std::size_t>(a)] = 0;
                --a;
            }
            if (a < 0) break;
        }
        return pts;
    }
    const int total = cfg.per_axis * cfg.per_axis * cfg.per_axis;
    rng64 rng(0x5eedu);
    pts.reserve(static_cast<std::size_t>(total));
    for (int k = 0; k < total; ++k) {
        vec p(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a)
            p[static_cast<std::size_t>(a)] = rng.uniform(-cfg.extent, cfg.extent);
        pts.push_back(std::move(p));
    }
    return pts;
}

inline std::string point_string(const vec& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(x[i]);
    }
    return s + ")";
}

}  // namespace detail

// Shift functions for a map that slides each point along the first n
// coordinate directions: alpha_i = f_i - x_i.  Components n+1..m must be
// untouched by f; that is checked on a sample grid and violated points are
// reported.  With n == m every map qualifies and the determinant functional
// of the result is the ordinary Jacobian determinant of f.
inline std::vector<scalar_field> decompose_translation(const leaf_map& f, int leaf_dim,
                                                       const sample_grid_cfg& grid = {}) {
    const int m = f.ambient_dim();
    if (leaf_dim < 1 || leaf_dim > m)
        throw dimension_error("decompose_translation: leaf_dim must be in 1..ambient_dim");

    if (leaf_dim < m) {
        for (const vec& x : detail::sample_points(m, grid)) {
            const vec y = f.value(x);
            for (int i = leaf_dim; i < m; ++i) {
                const auto k = static_cast<std::size_t>(i);
                if (std::abs(y[k] - x[k]) > 1e-9)
                    throw reconstruction_error(
                        "map moves coordinate x" + std::to_string(i + 1) +
                            " off its leaf at " + detail::point_string(x),
                        x);
            }
        }
    }

    std::vector<scalar_field> alphas;
    alphas.reserve(static_cast<std::size_t>(leaf_dim));
    for (int i = 0; i < leaf_dim; ++i) {
        const scalar_field& fi = f.components()[static_cast<std::size_t>(i)];
        if (fi.is_expression()) {
            alphas.emplace_back(m, make_difference(fi.body(), make_variable(i + 1)));
        } else {
            const std::size_t k = static_cast<std::size_t>(i);
            alphas.push_back(scalar_field::numeric(
                m, [fi, k](const vec& x) { return fi.value(x) - x[k]; }));
        }
    }
    return alphas;
}

// The frame of fields matching decompose_translation: translations along
// e_1..e_n in R^m.
inline std::vector<vector_field> translation_frame(int ambient_dim, int leaf_dim) {
    std::vector<vector_field> fields;
    fields.reserve(static_cast<std::size_t>(leaf_dim));
    for (int i = 0; i < leaf_dim; ++i)
        fields.push_back(vector_field::translation(
            unit_vector(static_cast<std::size_t>(ambient_dim), static_cast<std::size_t>(i))));
    return fields;
}

// One factor of a product foliation.  The block owns dim coordinates and a
// field on them; translation blocks move along one local coordinate axis.
struct foliation_block {
    int dim = 0;
    field_kind kind = field_kind::zero;  // zero | translation | linear
    int translation_axis = 0;            // local, 0-based
    matrix coefficient;                  // linear blocks: dim x dim
};

class product_foliation {
public:
    explicit product_foliation(std::vector<foliation_block> blocks)
        : blocks_(std::move(blocks)) {
        if (blocks_.empty()) throw domain_error("product_foliation: no blocks");
        int total = 0;
        for (const foliation_block& b : blocks_) {
            if (b.dim < 0) throw dimension_error("product_foliation: negative block dim");
            switch (b.kind) {
                case field_kind::zero:
                    break;
                case field_kind::translation:
                    if (b.dim < 1 || b.translation_axis < 0 || b.translation_axis >= b.dim)
                        throw dimension_error(
                            "product_foliation: translation axis outside its block");
                    break;
                case field_kind::linear:
                    if (b.dim < 1 || !b.coefficient.square() ||
                        b.coefficient.rows() != static_cast<std::size_t>(b.dim))
                        throw dimension_error(
                            "product_foliation: linear block needs a dim x dim matrix");
                    break;
                default:
                    throw domain_error(
                        "product_foliation: block fields must be zero, translation or linear");
            }
            if (b.dim == 0 && b.kind != field_kind::zero)
                throw domain_error("product_foliation: empty blocks carry the zero field");
            total += b.dim;
        }
        if (total < 1) throw dimension_error("product_foliation: total dimension is zero");
        ambient_dim_ = total;
        offsets_.reserve(blocks_.size());
        int off = 0;
        for (const foliation_block& b : blocks_) {
            offsets_.push_back(off);
            off += b.dim;
        }
    }

    int ambient_dim() const noexcept { return ambient_dim_; }
    std::size_t block_count() const noexcept { return blocks_.size(); }
    const std::vector<foliation_block>& blocks() const noexcept { return blocks_; }
    int block_offset(std::size_t i) const { return offsets_[i]; }

    // The block field viewed on all of R^m (zero outside its coordinates).
    vector_field embedded_field(std::size_t i) const {
        const foliation_block& b = blocks_[i];
        const auto m = static_cast<std::size_t>(ambient_dim_);
        const auto off = static_cast<std::size_t>(offsets_[i]);
        switch (b.kind) {
            case field_kind::translation:
                return vector_field::translation(
                    unit_vector(m, off + static_cast<std::size_t>(b.translation_axis)));
            case field_kind::linear: {
                matrix a(m, m, 0.0);
                for (std::size_t r = 0; r < static_cast<std::size_t>(b.dim); ++r)
                    for (std::size_t c = 0; c < static_cast<std::size_t>(b.dim); ++c)
                        a(off + r, off + c) = b.coefficient(r, c);
                return vector_field::linear(std::move(a));
            }
            default:
                return vector_field::zero(ambient_dim_);
        }
    }

private:
    std::vector<foliation_block> blocks_;
    std::vector<int> offsets_;
    int ambient_dim_ = 0;
};

struct product_decomposition {
    std::vector<scalar_field> shift_functions;  // one per block, on R^m
    std::vector<std::string> block_notes;       // how each function was obtained
};

namespace detail {

inline vec block_slice(const vec& x, int offset, int dim) {
    vec s(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        s[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(offset + i)];
    return s;
}

// Time t with e^{tA} xi = target, by Gauss-Newton from t = 0 on the residual
// r(t) = e^{tA} xi - target (r'(t) = A e^{tA} xi).  Orbits through a zero of
// the field degenerate to a point; the map must then fix xi and t is 0.  On
// closed orbits the retrieval lands on the principal value nearest the seed.
inline double retrieve_block_time(const matrix& a, const vec& xi, const vec& target,
                                  const flow_config& cfg, const vec& witness) {
    const double target_scale = 1.0 + norm(target);
    const double field_norm = norm(a * xi);
    if (field_norm <= 1e-12 * (1.0 + norm(xi))) {
        vec r = xi;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= target[i];
        if (norm(r) > 1e-9 * target_scale)
            throw reconstruction_error(
                "block field vanishes but the map moves the point " + point_string(witness),
                witness);
        return 0.0;
    }

    double t = 0.0;
    for (int iter = 0; iter < 50; ++iter) {
        const vec phi = matrix_exp(a, t) * xi;
        vec r(phi.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = phi[i] - target[i];
        if (norm(r) <= 1e-12 * target_scale) return t;
        const vec v = a * phi;
        const double vv = dot(v, v);
        if (vv <= 1e-300)
            throw reconstruction_error(
                "time retrieval stalled on a vanishing velocity at " + point_string(witness),
                witness);
        t -= dot(r, v) / vv;
        if (!std::isfinite(t) || std::abs(t) > cfg.max_time)
            throw reconstruction_error(
                "time retrieval left the flow window at " + point_string(witness), witness);
    }
    throw reconstruction_error(
        "time retrieval did not converge after 50 iterations at " + point_string(witness),
        witness);
}

}  // namespace detail

// Shift functions turning f into flows along the block fields of a product
// foliation.  Zero blocks pin their coordinates (canonical function 0),
// translation blocks difference the moved coordinate symbolically, linear
// blocks retrieve the flow time numerically per query point.  Leaf
// preservation is checked on a sample grid up front; violations and
// non-convergent retrievals are reported with the witness point.
inline product_decomposition decompose_product(const leaf_map& f,
                                               const product_foliation& fol,
                                               const flow_config& cfg = {},
                                               const sample_grid_cfg& grid = {}) {
    const int m = f.ambient_dim();
    if (fol.ambient_dim() != m)
        throw dimension_error("decompose_product: foliation dimension does not match the map");

    const std::vector<vec> samples = detail::sample_points(m, grid);
    for (const vec& x : samples) {
        const vec y = f.value(x);
        for (std::size_t b = 0; b < fol.block_count(); ++b) {
            const foliation_block& blk = fol.blocks()[b];
            const int off = fol.block_offset(b);
            switch (blk.kind) {
                case field_kind::zero:
                    for (int i = 0; i < blk.dim; ++i) {
                        const auto k = static_cast<std::size_t>(off + i);
                        if (std::abs(y[k] - x[k]) > 1e-9)
                            throw reconstruction_error(
                                "map moves pinned coordinate x" + std::to_string(off + i + 1) +
                                    " at " + detail::point_string(x),
                                x);
                    }
                    break;
                case field_kind::translation:
                    for (int i = 0; i < blk.dim; ++i) {
                        if (i == blk.translation_axis) continue;
                        const auto k = static_cast<std::size_t>(off + i);
                        if (std::abs(y[k] - x[k]) > 1e-9)
                            throw reconstruction_error(
                                "map moves coordinate x" + std::to_string(off + i + 1) +
                                    " across translation orbits at " + detail::point_string(x),
                                x);
                    }
                    break;
                case field_kind::linear: {
                    // Retrieval doubles as the membership check.
                    detail::retrieve_block_time(
                        blk.coefficient, detail::block_slice(x, off, blk.dim),
                        detail::block_slice(y, off, blk.dim), cfg, x);
                    break;
                }
                default:
                    break;
            }
        }
    }

    product_decomposition out;
    out.shift_functions.reserve(fol.block_count());
    out.block_notes.reserve(fol.block_count());
    for (std::size_t b = 0; b < fol.block_count(); ++b) {
        const foliation_block& blk = fol.blocks()[b];
        const int off = fol.block_offset(b);
        switch (blk.kind) {
            case field_kind::zero:
                out.shift_functions.push_back(scalar_field::constant(m, 0.0));
                out.block_notes.push_back("zero field: shift function canonicalized to 0");
                break;
            case field_kind::translation: {
                const int g = off + blk.translation_axis;  // global index, 0-based
                const scalar_field& fg = f.components()[static_cast<std::size_t>(g)];
                if (fg.is_expression()) {
                    out.shift_functions.emplace_back(
                        m, make_difference(fg.body(), make_variable(g + 1)));
                } else {
                    const auto k = static_cast<std::size_t>(g);
                    out.shift_functions.push_back(scalar_field::numeric(
                        m, [fg, k](const vec& x) { return fg.value(x) - x[k]; }));
                }
                out.block_notes.push_back("translation: symbolic coordinate difference");
                break;
            }
            case field_kind::linear: {
                const matrix a = blk.coefficient;
                const int d = blk.dim;
                std::vector<scalar_field> f_block(
                    f.components().begin() + off, f.components().begin() + off + d);
                out.shift_functions.push_back(scalar_field::numeric(
                    m, [a, d, off, f_block, cfg](const vec& x) {
                        vec target(static_cast<std::size_t>(d));
                        for (int i = 0; i < d; ++i)
                            target[static_cast<std::size_t>(i)] =
                                f_block[static_cast<std::size_t>(i)].value(x);
                        return detail::retrieve_block_time(
                            a, detail::block_slice(x, off, d), target, cfg, x);
                    }));
                out.block_notes.push_back(
                    "linear: numeric time retrieval, principal value nearest 0 "
                    "(non-unique on closed orbits)");
                break;
            }
            default:
                break;
        }
    }
    return out;
}

// The companion spec for a product decomposition.
inline shift_spec product_decomposition_spec(const product_foliation& fol,
                                             std::vector<scalar_field> shift_functions,
                                             flow_config cfg = {}) {
    if (shift_functions.size() != fol.block_count())
        throw dimension_error("product_decomposition_spec: one function per block required");
    std::vector<shift_stage> stages;
    stages.reserve(fol.block_count());
    for (std::size_t b = 0; b < fol.block_count(); ++b)
        stages.push_back({fol.embedded_field(b), std::move(shift_functions[b])});
    return shift_spec(std::move(stages), cfg);
}

}  // namespace orbitshift
