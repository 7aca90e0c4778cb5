#pragma once

// Everything: physics modules, persistence and the driver commands.

#include "wsm/units.hpp"
#include "wsm/numerics/tridiagonal.hpp"
#include "wsm/lattice.hpp"
#include "wsm/polarizability.hpp"
#include "wsm/permittivity.hpp"
#include "wsm/casimir_polder.hpp"
#include "wsm/potential_table.hpp"
#include "wsm/regularization.hpp"
#include "wsm/corrections.hpp"
#include "wsm/yukawa.hpp"
#include "wsm/io/hash.hpp"
#include "wsm/io/csv.hpp"
#include "wsm/io/cache.hpp"
#include "wsm/io/config.hpp"
#include "wsm/app/commands.hpp"
