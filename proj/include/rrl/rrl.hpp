#pragma once

#include "rrl/agent.hpp"
#include "rrl/backtest.hpp"
#include "rrl/common.hpp"
#include "rrl/config.hpp"
#include "rrl/data.hpp"
#include "rrl/features.hpp"
#include "rrl/market.hpp"
#include "rrl/montecarlo.hpp"
#include "rrl/report.hpp"
#include "rrl/reservoir.hpp"
#include "rrl/stats.hpp"
