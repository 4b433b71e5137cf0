#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "orbitshift/d_symbol.hpp"
#include "orbitshift/errors.hpp"
#include "orbitshift/field.hpp"
#include "orbitshift/flow.hpp"

namespace orbitshift {

// One stage of a shift map: flow along `field` for time `func(x)`.
struct shift_stage {
    vector_field field;
    scalar_field func;
};

// A shift map x -> Phi_n(...Phi_1(x, a_1(x))..., a_n(x)).  Every shift
// function is evaluated at the ORIGINAL point; the stage flows then compose.
class shift_spec {
public:
    explicit shift_spec(std::vector<shift_stage> stages, flow_config cfg = {})
        : stages_(std::move(stages)), cfg_(cfg) {
        if (stages_.empty()) throw domain_error("shift_spec: needs at least one stage");
        const int m = stages_[0].field.ambient_dim();
        for (const shift_stage& s : stages_)
            if (s.field.ambient_dim() != m || s.func.ambient_dim() != m)
                throw dimension_error("shift_spec: stages must share one ambient dimension");
    }

    const std::vector<shift_stage>& stages() const noexcept { return stages_; }
    const flow_config& config() const noexcept { return cfg_; }
    std::size_t size() const noexcept { return stages_.size(); }
    int ambient_dim() const noexcept { return stages_[0].field.ambient_dim(); }

private:
    std::vector<shift_stage> stages_;
    flow_config cfg_;
};

// Evaluate the shift map at x.  All stage times are computed from x up front,
// then the flows compose; failures carry the 1-based stage index.
inline vec apply_shift(const shift_spec& spec, const vec& x) {
    if (x.size() != static_cast<std::size_t>(spec.ambient_dim()))
        throw dimension_error("apply_shift: point dimension does not match the spec");

    std::vector<double> times;
    times.reserve(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        try {
            times.push_back(spec.stages()[i].func.value(x));
        } catch (const error& e) {
            throw stage_error(static_cast<int>(i) + 1, e.what());
        }
    }

    vec y = x;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        try {
            y = flow(spec.stages()[i].field, y, times[i], spec.config());
        } catch (const error& e) {
            throw stage_error(static_cast<int>(i) + 1, e.what());
        }
    }
    return y;
}

struct lambda_result {
    double value;           // |E_n + Y| with Y_ij = <F_j(x), grad a_i(x)>
    double cross_residual;  // disagreement with the m x m form
};

namespace detail {

inline vector_pair stage_pair_at(const shift_spec& spec, const vec& x) {
    vector_pair p;
    p.f_vectors.reserve(spec.size());
    p.a_vectors.reserve(spec.size());
    for (const shift_stage& s : spec.stages()) {
        p.f_vectors.push_back(s.field.value(x));
        p.a_vectors.push_back(s.func.gradient(x));
    }
    return p;
}

}  // namespace detail

// The determinant functional that decides whether the shift map is a local
// diffeomorphism at x.  Purely pointwise: no flows are evaluated.
inline lambda_result lambda_functional(const shift_spec& spec, const vec& x) {
    if (x.size() != static_cast<std::size_t>(spec.ambient_dim()))
        throw dimension_error("lambda_functional: point dimension does not match the spec");
    const d_symbol_result r = d_symbol(detail::stage_pair_at(spec, x));
    return {r.value, r.cross_residual};
}

// Jacobian of an R^m -> R^k map by central differences, column by column.
template <class Map>
matrix fd_jacobian(Map&& map, const vec& x, double step) {
    if (!(step > 0.0) || !std::isfinite(step))
        throw domain_error("fd_jacobian: step must be positive and finite");
    vec p = x;
    matrix j(1, 1);
    bool sized = false;
    for (std::size_t c = 0; c < x.size(); ++c) {
        p[c] = x[c] + step;
        const vec plus = map(p);
        p[c] = x[c] - step;
        const vec minus = map(p);
        p[c] = x[c];
        if (plus.size() != minus.size())
            throw dimension_error("fd_jacobian: map image dimension varies");
        if (!sized) {
            j = matrix(plus.size(), x.size());
            sized = true;
        }
        for (std::size_t r = 0; r < plus.size(); ++r)
            j(r, c) = (plus[r] - minus[r]) / (2.0 * step);
    }
    return j;
}

struct reduction {
    shift_spec reduced;  // same fields, shift functions a_i - a_i(x): vanish at x
    shift_spec beta;     // same fields, constant functions a_i(x)
};

// Split the spec at x into a part fixing x and a constant-time part.  The
// shift functions' gradients are untouched by the constant subtraction, so
// the determinant functional of `reduced` at x equals the original exactly.
inline reduction reduce_to_fixed_point(const shift_spec& spec, const vec& x) {
    if (x.size() != static_cast<std::size_t>(spec.ambient_dim()))
        throw dimension_error("reduce_to_fixed_point: point dimension does not match the spec");
    const int m = spec.ambient_dim();

    std::vector<shift_stage> reduced_stages;
    std::vector<shift_stage> beta_stages;
    reduced_stages.reserve(spec.size());
    beta_stages.reserve(spec.size());
    for (const shift_stage& s : spec.stages()) {
        const double c = s.func.value(x);
        if (s.func.is_expression()) {
            reduced_stages.push_back(
                {s.field, scalar_field(m, make_difference(s.func.body(), make_constant(c)))});
        } else {
            const scalar_field base = s.func;
            reduced_stages.push_back(
                {s.field, scalar_field::numeric(
                              m, [base, c](const vec& p) { return base.value(p) - c; })});
        }
        beta_stages.push_back({s.field, scalar_field::constant(m, c)});
    }
    return {shift_spec(std::move(reduced_stages), spec.config()),
            shift_spec(std::move(beta_stages), spec.config())};
}

enum class diffeo_verdict { preserving, reversing, degenerate };

inline const char* to_string(diffeo_verdict v) {
    switch (v) {
        case diffeo_verdict::preserving: return "diffeomorphism_preserving";
        case diffeo_verdict::reversing: return "diffeomorphism_reversing";
        case diffeo_verdict::degenerate: return "degenerate";
    }
    return "?";
}

struct classification_report {
    double lambda = 0.0;
    double cross_residual = 0.0;
    double degeneracy_threshold = 0.0;
    diffeo_verdict verdict = diffeo_verdict::degenerate;
    bool has_oracle = false;
    double fd_jacobian_det = 0.0;   // det FD(spec) / det FD(beta)
    double oracle_residual = 0.0;   // |lambda - fd_jacobian_det|
};

namespace detail {

// Scale-aware cutoff below which the determinant functional is treated as
// vanishing: 1e-8 * (1 + sum_i |F_i(x)| |grad a_i(x)|).
inline double degeneracy_threshold(const vector_pair& p) {
    double scale = 0.0;
    for (std::size_t i = 0; i < p.f_vectors.size(); ++i)
        scale += norm(p.f_vectors[i]) * norm(p.a_vectors[i]);
    return 1e-8 * (1.0 + scale);
}

}  // namespace detail

// Classify the shift map at x by the sign of the determinant functional.
// With the oracle enabled, the map is reduced so x becomes a fixed point and
// the functional is checked against a finite-difference Jacobian determinant
// ratio det FD(spec) / det FD(beta); at an actual fixed point beta is the
// identity and the ratio is a plain Jacobian determinant.
inline classification_report classify_point(const shift_spec& spec, const vec& x,
                                            bool with_oracle = false) {
    if (x.size() != static_cast<std::size_t>(spec.ambient_dim()))
        throw dimension_error("classify_point: point dimension does not match the spec");

    const vector_pair pair = detail::stage_pair_at(spec, x);
    const d_symbol_result d = d_symbol(pair);

    classification_report report;
    report.lambda = d.value;
    report.cross_residual = d.cross_residual;
    report.degeneracy_threshold = detail::degeneracy_threshold(pair);
    if (std::abs(d.value) <= report.degeneracy_threshold)
        report.verdict = diffeo_verdict::degenerate;
    else if (d.value > 0.0)
        report.verdict = diffeo_verdict::preserving;
    else
        report.verdict = diffeo_verdict::reversing;

    if (with_oracle) {
        const reduction red = reduce_to_fixed_point(spec, x);
        const double h = 1e-5 * (1.0 + norm(x));
        const double fd_spec =
            det(fd_jacobian([&](const vec& p) { return apply_shift(spec, p); }, x, h));
        const double fd_beta =
            det(fd_jacobian([&](const vec& p) { return apply_shift(red.beta, p); }, x, h));
        report.has_oracle = true;
        report.fd_jacobian_det = fd_spec / fd_beta;
        report.oracle_residual = std::abs(report.lambda - report.fd_jacobian_det);
    }
    return report;
}

// Four-stage spec flowing F1, F2 forward and back with the same times:
// (F1,a1), (F2,a2), (F1,-a1), (F2,-a2).  Its determinant functional is
// identically 1 because the rank-one terms cancel pairwise, even when the
// fields do not commute (the map itself is generally not the identity).
inline shift_spec build_commutator(const vector_field& f1, const scalar_field& a1,
                                   const vector_field& f2, const scalar_field& a2,
                                   flow_config cfg = {}) {
    std::vector<shift_stage> stages;
    stages.reserve(4);
    stages.push_back({f1, a1});
    stages.push_back({f2, a2});
    stages.push_back({f1, -a1});
    stages.push_back({f2, -a2});
    return shift_spec(std::move(stages), cfg);
}

// Reorder stages: result stage i is spec stage sigma[i] (0-based).  The
// determinant functional is invariant under this; the map itself is not.
inline shift_spec permuted(const shift_spec& spec, const std::vector<std::size_t>& sigma) {
    const std::size_t n = spec.size();
    if (sigma.size() != n) throw domain_error("permuted: sigma size does not match");
    std::vector<bool> seen(n, false);
    for (std::size_t s : sigma) {
        if (s >= n || seen[s]) throw domain_error("permuted: sigma is not a permutation");
        seen[s] = true;
    }
    std::vector<shift_stage> stages;
    stages.reserve(n);
    for (std::size_t i = 0; i < n; ++i) stages.push_back(spec.stages()[sigma[i]]);
    return shift_spec(std::move(stages), spec.config());
}

}  // namespace orbitshift
