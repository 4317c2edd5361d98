#pragma once

#include "loopsim/dataset.hpp"
#include "loopsim/engine.hpp"
#include "loopsim/ingest.hpp"
#include "loopsim/io.hpp"
#include "loopsim/metrics.hpp"
#include "loopsim/recommenders.hpp"
#include "loopsim/reranking.hpp"
#include "loopsim/rng.hpp"
#include "loopsim/types.hpp"
