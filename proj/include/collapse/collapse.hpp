#pragma once

#include "collapse/collapse_process.hpp"
#include "collapse/epr.hpp"
#include "collapse/error.hpp"
#include "collapse/geometry.hpp"
#include "collapse/io.hpp"
#include "collapse/kg_solver.hpp"
#include "collapse/magnitudes.hpp"
#include "collapse/quadrature.hpp"
#include "collapse/series.hpp"
#include "collapse/wavefunction.hpp"
