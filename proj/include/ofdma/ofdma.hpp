#pragma once

#include "ofdma/assignment.hpp"
#include "ofdma/channel.hpp"
#include "ofdma/error.hpp"
#include "ofdma/harness.hpp"
#include "ofdma/metrics.hpp"
#include "ofdma/multicell.hpp"
#include "ofdma/power_allocation.hpp"
#include "ofdma/rng.hpp"
