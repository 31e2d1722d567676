// Umbrella header.
#pragma once

#include "reldec/builtin_scenarios.hpp"
#include "reldec/common.hpp"
#include "reldec/ensemble.hpp"
#include "reldec/layout.hpp"
#include "reldec/parallel.hpp"
#include "reldec/qstate.hpp"
#include "reldec/rng.hpp"
#include "reldec/scenario.hpp"
#include "reldec/serialize.hpp"
#include "reldec/states.hpp"
#include "reldec/witness.hpp"
