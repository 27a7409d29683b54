#pragma once

// Umbrella header for the library (the command-line front end lives in
// hpl/cli.hpp and additionally needs CLI11).

#include "hpl/core.hpp"
#include "hpl/density.hpp"
#include "hpl/quadrature.hpp"
#include "hpl/cubature.hpp"
#include "hpl/kernel.hpp"
#include "hpl/measure.hpp"
#include "hpl/measure_io.hpp"
#include "hpl/trend.hpp"
#include "hpl/differentiation.hpp"
#include "hpl/semigroup.hpp"
#include "hpl/suite_config.hpp"
#include "hpl/experiments.hpp"
