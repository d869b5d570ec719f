#pragma once

#include "sdrvm/types.hpp"
#include "sdrvm/linalg.hpp"
#include "sdrvm/rng.hpp"
#include "sdrvm/solver.hpp"
#include "sdrvm/baselines.hpp"
#include "sdrvm/block.hpp"
#include "sdrvm/metrics.hpp"
#include "sdrvm/instances.hpp"
#include "sdrvm/table.hpp"
#include "sdrvm/sweeps.hpp"
#include "sdrvm/housing.hpp"
#include "sdrvm/image.hpp"
#include "sdrvm/selfcheck.hpp"
