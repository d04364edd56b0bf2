#pragma once

// Convenience umbrella for the whole library.

#include "stochdom/analytic.hpp"
#include "stochdom/common.hpp"
#include "stochdom/empirical.hpp"
#include "stochdom/inference.hpp"
#include "stochdom/normal.hpp"
#include "stochdom/order_distance.hpp"
#include "stochdom/quadrature.hpp"
#include "stochdom/rational.hpp"
#include "stochdom/rng.hpp"
#include "stochdom/simlab.hpp"
#include "stochdom/trimming.hpp"
#include "stochdom/u_functionals.hpp"
