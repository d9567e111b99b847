#pragma once

#include "tsforge/anomaly.hpp"
#include "tsforge/dsl.hpp"
#include "tsforge/engine.hpp"
#include "tsforge/errors.hpp"
#include "tsforge/expr.hpp"
#include "tsforge/funcgen.hpp"
#include "tsforge/graph.hpp"
#include "tsforge/io.hpp"
#include "tsforge/params.hpp"
#include "tsforge/plot.hpp"
#include "tsforge/rng.hpp"
