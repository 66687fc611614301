// Umbrella header.
#pragma once

#include "rmtl/design.hpp"
#include "rmtl/estimation.hpp"
#include "rmtl/hypothesis.hpp"
#include "rmtl/io.hpp"
#include "rmtl/models.hpp"
#include "rmtl/numerics.hpp"
#include "rmtl/simulation.hpp"
