#pragma once

#include "rplab/dipole.hpp"
#include "rplab/energy.hpp"
#include "rplab/error.hpp"
#include "rplab/gauge.hpp"
#include "rplab/gauge_exact.hpp"
#include "rplab/gauge_mc.hpp"
#include "rplab/inequalities.hpp"
#include "rplab/lattice.hpp"
#include "rplab/observable.hpp"
#include "rplab/probes.hpp"
#include "rplab/quadrature.hpp"
#include "rplab/random_functionals.hpp"
#include "rplab/rng.hpp"
#include "rplab/scalar.hpp"
#include "rplab/scalar_exact.hpp"
#include "rplab/scalar_mc.hpp"
#include "rplab/statistics.hpp"
