#pragma once

#include "david/demand.hpp"
#include "david/econ_model.hpp"
#include "david/equilibrium.hpp"
#include "david/error.hpp"
#include "david/io.hpp"
#include "david/mechanisms.hpp"
#include "david/properties.hpp"
#include "david/simulation.hpp"
#include "david/suites.hpp"
#include "david/spda.hpp"
