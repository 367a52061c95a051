#pragma once

// Umbrella header: the full public surface of the library.

#include "semisplit/bounds.hpp"
#include "semisplit/classical.hpp"
#include "semisplit/errors.hpp"
#include "semisplit/harness.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/ot.hpp"
#include "semisplit/phasespace.hpp"
#include "semisplit/potential.hpp"
#include "semisplit/quantum.hpp"
#include "semisplit/util.hpp"
#include "semisplit/version.hpp"
