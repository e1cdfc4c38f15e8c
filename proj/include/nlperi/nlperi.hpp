#pragma once

#include "version.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "grid.hpp"
#include "fft.hpp"
#include "spectral.hpp"
#include "quadrature.hpp"
#include "constants.hpp"
#include "kernels.hpp"
#include "operator.hpp"
#include "marcinkiewicz.hpp"
#include "solver.hpp"
#include "potentials.hpp"
#include "poisson.hpp"
#include "config.hpp"
#include "report.hpp"
#include "experiments.hpp"
