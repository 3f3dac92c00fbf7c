#pragma once

// Umbrella header.

#include "chiralqed/analytic_series.hpp"
#include "chiralqed/cli.hpp"
#include "chiralqed/core_model.hpp"
#include "chiralqed/dde_engine.hpp"
#include "chiralqed/errors.hpp"
#include "chiralqed/field.hpp"
#include "chiralqed/mode_oracle.hpp"
#include "chiralqed/presets.hpp"
#include "chiralqed/steady_state.hpp"
