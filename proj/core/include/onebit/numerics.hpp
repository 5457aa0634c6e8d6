#pragma once

// Umbrella header for the numeric building blocks.
#include "onebit/constellation.hpp"
#include "onebit/dft.hpp"
#include "onebit/probit.hpp"
#include "onebit/rng.hpp"
#include "onebit/types.hpp"
