#pragma once

#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/io.hpp"
#include "mgs/nonlinearity.hpp"
#include "mgs/parallel.hpp"
#include "mgs/quadrature.hpp"
#include "mgs/radial_ivp.hpp"
#include "mgs/shooting.hpp"
#include "mgs/variational.hpp"
