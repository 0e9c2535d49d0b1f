#pragma once

#include "geex/dense_net.hpp"
#include "geex/errors.hpp"
#include "geex/evaluate.hpp"
#include "geex/explain.hpp"
#include "geex/grid.hpp"
#include "geex/io.hpp"
#include "geex/model.hpp"
#include "geex/model_io.hpp"
#include "geex/parallel.hpp"
#include "geex/rng.hpp"
#include "geex/sampling.hpp"
