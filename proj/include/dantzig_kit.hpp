#pragma once

// Everything except the command-line front end (dantzig_kit/cli.hpp).

#include "dantzig_kit/asymptotics.hpp"
#include "dantzig_kit/csv.hpp"
#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/halfplane.hpp"
#include "dantzig_kit/kkt.hpp"
#include "dantzig_kit/lasso.hpp"
#include "dantzig_kit/linalg.hpp"
#include "dantzig_kit/lp.hpp"
#include "dantzig_kit/parallel.hpp"
#include "dantzig_kit/random.hpp"
#include "dantzig_kit/stats.hpp"
#include "dantzig_kit/uniqueness.hpp"
