#pragma once

// Umbrella header: exact Laurent q-series arithmetic, classical modular form
// constructors, coefficient operators, ball arithmetic with certified special
// functions, Kloosterman sums, the Poincare coefficient engine, and the
// verification suite.

#include "maassq/arith.hpp"
#include "maassq/qseries.hpp"
#include "maassq/modular_forms.hpp"
#include "maassq/operators.hpp"
#include "maassq/ball.hpp"
#include "maassq/special_functions.hpp"
#include "maassq/kloosterman.hpp"
#include "maassq/poincare.hpp"
#include "maassq/verify.hpp"
