#pragma once

#include "pnp/cg.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/error.hpp"
#include "pnp/grid.hpp"
#include "pnp/mms.hpp"
#include "pnp/mobility.hpp"
#include "pnp/oracle.hpp"
#include "pnp/poisson.hpp"
#include "pnp/transport.hpp"
