#pragma once

#include "sirenv/analytics.hpp"
#include "sirenv/config.hpp"
#include "sirenv/distribution.hpp"
#include "sirenv/dynamics.hpp"
#include "sirenv/environment.hpp"
#include "sirenv/erdos_renyi.hpp"
#include "sirenv/error.hpp"
#include "sirenv/experiment.hpp"
#include "sirenv/fenwick.hpp"
#include "sirenv/io.hpp"
#include "sirenv/meanfield.hpp"
#include "sirenv/percolation.hpp"
#include "sirenv/rng.hpp"
#include "sirenv/statistics.hpp"
