#pragma once

#include "betmarket/stats_core.hpp"
#include "betmarket/agents.hpp"
#include "betmarket/engine.hpp"
#include "betmarket/harness.hpp"
#include "betmarket/io.hpp"
