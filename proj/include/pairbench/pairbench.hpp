#pragma once

#include "pairbench/core.hpp"
#include "pairbench/fit.hpp"
#include "pairbench/propagation.hpp"
#include "pairbench/pump_ring.hpp"
#include "pairbench/rate_model.hpp"
#include "pairbench/registry.hpp"
#include "pairbench/schmidt.hpp"
#include "pairbench/version.hpp"
