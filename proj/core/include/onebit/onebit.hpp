#pragma once

#include "onebit/channel.hpp"
#include "onebit/detectors.hpp"
#include "onebit/frontend.hpp"
#include "onebit/harness.hpp"
#include "onebit/likelihood.hpp"
#include "onebit/numerics.hpp"
#include "onebit/selftest.hpp"
