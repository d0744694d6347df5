#pragma once

// Umbrella header for the virtual calculus engine.

#include "vcalc/value.hpp"
#include "vcalc/expr.hpp"
#include "vcalc/parser.hpp"
#include "vcalc/render.hpp"
#include "vcalc/simplify.hpp"
#include "vcalc/evaluate.hpp"
#include "vcalc/differentiate.hpp"
#include "vcalc/breakpoints.hpp"
#include "vcalc/decision.hpp"
#include "vcalc/vnum.hpp"
#include "vcalc/vfunc.hpp"
#include "vcalc/quadrature.hpp"
#include "vcalc/vintegral.hpp"
#include "vcalc/vseq.hpp"
