#pragma once

#include "stlmc/diagnostics.hpp"
#include "stlmc/divergence.hpp"
#include "stlmc/error.hpp"
#include "stlmc/estimates.hpp"
#include "stlmc/exact_sampler.hpp"
#include "stlmc/finite_chain.hpp"
#include "stlmc/heteroscedastic.hpp"
#include "stlmc/instances.hpp"
#include "stlmc/langevin.hpp"
#include "stlmc/langevin_generator.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/partition_estimator.hpp"
#include "stlmc/quadrature.hpp"
#include "stlmc/rng.hpp"
#include "stlmc/structural.hpp"
#include "stlmc/tempering.hpp"
#include "stlmc/tempering_bounds.hpp"
