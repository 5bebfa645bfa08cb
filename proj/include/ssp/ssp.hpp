#pragma once

#include "ssp/analytics.hpp"
#include "ssp/errors.hpp"
#include "ssp/format.hpp"
#include "ssp/hard_instances.hpp"
#include "ssp/io.hpp"
#include "ssp/market.hpp"
#include "ssp/model.hpp"
#include "ssp/montecarlo.hpp"
#include "ssp/numeric.hpp"
#include "ssp/oracle.hpp"
#include "ssp/parallel.hpp"
#include "ssp/rng.hpp"
