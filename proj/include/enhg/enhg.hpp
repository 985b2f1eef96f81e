#pragma once

#include "enhg/baselines.hpp"
#include "enhg/datio.hpp"
#include "enhg/elasticnet.hpp"
#include "enhg/error.hpp"
#include "enhg/hypergraph.hpp"
#include "enhg/learn.hpp"
#include "enhg/metrics.hpp"
#include "enhg/parallel.hpp"
#include "enhg/serialize.hpp"
