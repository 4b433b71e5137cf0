#pragma once

// Shift maps along orbits of vector fields: umbrella include.

#include "orbitshift/char_poly.hpp"
#include "orbitshift/d_symbol.hpp"
#include "orbitshift/errors.hpp"
#include "orbitshift/expr.hpp"
#include "orbitshift/field.hpp"
#include "orbitshift/flow.hpp"
#include "orbitshift/foliation.hpp"
#include "orbitshift/matrix.hpp"
#include "orbitshift/matrix_exp.hpp"
#include "orbitshift/random.hpp"
#include "orbitshift/scenario.hpp"
#include "orbitshift/shift.hpp"
