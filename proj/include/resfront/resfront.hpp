#pragma once

#include "resfront/errors.hpp"
#include "resfront/extended_real.hpp"
#include "resfront/quadrature.hpp"
#include "resfront/ode.hpp"
#include "resfront/interp.hpp"
#include "resfront/nonlinearity.hpp"
#include "resfront/phase_plane.hpp"
#include "resfront/semiwave.hpp"
#include "resfront/solver.hpp"
#include "resfront/classifier.hpp"
#include "resfront/threshold.hpp"
#include "resfront/certificates.hpp"
