// Umbrella header pulling in the whole library.
#pragma once

#include "spuds/asymptotics.hpp"
#include "spuds/common.hpp"
#include "spuds/dataset.hpp"
#include "spuds/density.hpp"
#include "spuds/embedding.hpp"
#include "spuds/graph.hpp"
#include "spuds/kmeans.hpp"
#include "spuds/metrics.hpp"
#include "spuds/scale.hpp"
#include "spuds/spuds.hpp"
