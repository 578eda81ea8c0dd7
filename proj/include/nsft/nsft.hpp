#pragma once

// Umbrella header: pulls in the whole library.

#include "nsft/core.hpp"
#include "nsft/errors.hpp"
#include "nsft/io.hpp"
#include "nsft/metrics.hpp"
#include "nsft/model.hpp"
#include "nsft/random.hpp"
#include "nsft/serialize.hpp"
#include "nsft/synthetic.hpp"
#include "nsft/tensor.hpp"
#include "nsft/training.hpp"
