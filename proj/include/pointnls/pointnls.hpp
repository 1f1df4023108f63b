#pragma once

#include "analysis.hpp"
#include "charge.hpp"
#include "cli.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "observables.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "propagator.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"
#include "states.hpp"
