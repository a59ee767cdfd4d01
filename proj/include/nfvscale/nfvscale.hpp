#pragma once

// Umbrella header: the whole library in dependency order.

#include "nfvscale/rng.hpp"
#include "nfvscale/domain.hpp"
#include "nfvscale/traffic.hpp"
#include "nfvscale/net.hpp"
#include "nfvscale/sim.hpp"
#include "nfvscale/scaling.hpp"
#include "nfvscale/monitor.hpp"
#include "nfvscale/ddpg.hpp"
#include "nfvscale/csv.hpp"
#include "nfvscale/config.hpp"
#include "nfvscale/policy.hpp"
#include "nfvscale/harness.hpp"
