#pragma once

#include "fgp/error.hpp"
#include "fgp/format.hpp"
#include "fgp/market.hpp"
#include "fgp/generators.hpp"
#include "fgp/rank.hpp"
#include "fgp/engine.hpp"
#include "fgp/rank_engine.hpp"
#include "fgp/simulator.hpp"
#include "fgp/ingest.hpp"
#include "fgp/series_io.hpp"
#include "fgp/svg_plot.hpp"
