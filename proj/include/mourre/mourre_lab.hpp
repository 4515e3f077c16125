#pragma once

// Everything at once.

#include "mourre/linalg.hpp"
#include "mourre/grid.hpp"
#include "mourre/spectral.hpp"
#include "mourre/operators.hpp"
#include "mourre/parallel.hpp"
#include "mourre/rho.hpp"
#include "mourre/hypotheses.hpp"
#include "mourre/scattering.hpp"
#include "mourre/io.hpp"
#include "mourre/experiment.hpp"
