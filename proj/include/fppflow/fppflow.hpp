#pragma once

#include "fppflow/core.hpp"
#include "fppflow/rational.hpp"
#include "fppflow/geometry.hpp"
#include "fppflow/capacity_field.hpp"
#include "fppflow/seeds.hpp"
#include "fppflow/zero_clusters.hpp"
#include "fppflow/maxflow.hpp"
#include "fppflow/mincut.hpp"
#include "fppflow/statistics.hpp"
#include "fppflow/experiments.hpp"
#include "fppflow/io.hpp"
