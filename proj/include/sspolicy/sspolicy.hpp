#pragma once

#include "sspolicy/extended_real.hpp"
#include "sspolicy/quadrature.hpp"
#include "sspolicy/domain_map.hpp"
#include "sspolicy/expression.hpp"
#include "sspolicy/diffusion.hpp"
#include "sspolicy/costs.hpp"
#include "sspolicy/characteristics.hpp"
#include "sspolicy/models.hpp"
#include "sspolicy/solver.hpp"
#include "sspolicy/qvi.hpp"
#include "sspolicy/rng.hpp"
#include "sspolicy/simulator.hpp"
#include "sspolicy/config.hpp"
#include "sspolicy/io.hpp"
