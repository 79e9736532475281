#pragma once

#include "cgareg/errors.hpp"
#include "cgareg/ga.hpp"
#include "cgareg/cga.hpp"
#include "cgareg/spectra.hpp"
#include "cgareg/register.hpp"
#include "cgareg/ply.hpp"
#include "cgareg/bench.hpp"
#include "cgareg/selftest.hpp"
