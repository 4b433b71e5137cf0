#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "orbitshift/errors.hpp"
#include "orbitshift/field.hpp"
#include "orbitshift/matrix_exp.hpp"

namespace orbitshift {

enum class flow_method {
    exact_if_possible,  // closed forms for zero/translation/linear, RK4 otherwise
    rk4,                // force the integrator for every kind
};

struct flow_config {
    flow_method method = flow_method::exact_if_possible;
    double rk4_step = 1e-3;
    double max_time = 10.0;
    double domain_radius = 1e6;
};

namespace detail {

inline void validate_flow_config(const flow_config& cfg) {
    const bool ok = cfg.rk4_step > 0.0 && std::isfinite(cfg.rk4_step) &&
                    cfg.max_time > 0.0 && std::isfinite(cfg.max_time) &&
                    cfg.domain_radius > 0.0 && std::isfinite(cfg.domain_radius);
    if (!ok) throw domain_error("flow_config: step, max_time, radius must be positive and finite");
}

inline void check_radius(const vec& y, double radius, const char* where) {
    if (!(norm(y) <= radius))
        throw flow_error(flow_failure::trajectory_escape,
                         std::string("trajectory left the flow domain (") + where + ")");
}

// One classical Runge-Kutta step of size h, in place.
inline void rk4_step(const vector_field& field, vec& y, double h) {
    const std::size_t m = y.size();
    const vec k1 = field.value(y);
    vec p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = y[i] + 0.5 * h * k1[i];
    const vec k2 = field.value(p);
    for (std::size_t i = 0; i < m; ++i) p[i] = y[i] + 0.5 * h * k2[i];
    const vec k3 = field.value(p);
    for (std::size_t i = 0; i < m; ++i) p[i] = y[i] + h * k3[i];
    const vec k4 = field.value(p);
    for (std::size_t i = 0; i < m; ++i)
        y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

inline vec integrate_rk4(const vector_field& field, const vec& x, double t,
                         const flow_config& cfg) {
    vec y = x;
    const double span = std::abs(t);
    const double dir = (t >= 0.0) ? 1.0 : -1.0;
    const auto full_steps = static_cast<long long>(std::floor(span / cfg.rk4_step));
    for (long long s = 0; s < full_steps; ++s) {
        rk4_step(field, y, dir * cfg.rk4_step);
        check_radius(y, cfg.domain_radius, "rk4");
    }
    const double remainder = span - static_cast<double>(full_steps) * cfg.rk4_step;
    if (remainder > 0.0) {
        rk4_step(field, y, dir * remainder);
        check_radius(y, cfg.domain_radius, "rk4");
    }
    return y;
}

}  // namespace detail

// Time-t flow map of the field, from x.  Structured kinds use their closed
// forms under exact_if_possible (translation: x + t d; linear: e^{tA} x);
// expression fields integrate with fixed-step RK4, final partial step landing
// exactly on t.  |t| beyond max_time raises a time-bound error; any produced
// point outside domain_radius raises a trajectory-escape error.
inline vec flow(const vector_field& field, const vec& x, double t,
                const flow_config& cfg = {}) {
    detail::validate_flow_config(cfg);
    if (x.size() != static_cast<std::size_t>(field.ambient_dim()))
        throw dimension_error("flow: point dimension does not match the field");
    if (!std::isfinite(t) || std::abs(t) > cfg.max_time)
        throw flow_error(flow_failure::time_bound,
                         "flow time " + std::to_string(t) + " exceeds max_time " +
                             std::to_string(cfg.max_time));
    detail::check_radius(x, cfg.domain_radius, "start");
    if (t == 0.0) return x;

    // A zero field moves nothing under either method.
    if (field.kind() == field_kind::zero) return x;

    const bool use_exact = cfg.method == flow_method::exact_if_possible;
    if (use_exact && field.kind() == field_kind::translation) {
        vec y = x;
        const vec& d = field.direction();
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * d[i];
        detail::check_radius(y, cfg.domain_radius, "translation");
        return y;
    }
    if (use_exact && field.kind() == field_kind::linear) {
        vec y = matrix_exp(field.coefficient(), t) * x;
        detail::check_radius(y, cfg.domain_radius, "linear");
        return y;
    }
    return detail::integrate_rk4(field, x, t, cfg);
}

// Velocity along the trajectory: the field evaluated at the flowed point.
inline vec flow_time_derivative(const vector_field& field, const vec& x, double t,
                                const flow_config& cfg = {}) {
    return field.value(flow(field, x, t, cfg));
}

}  // namespace orbitshift
