#pragma once

#include "fgb/action.hpp"
#include "fgb/averaging.hpp"
#include "fgb/boundary.hpp"
#include "fgb/density.hpp"
#include "fgb/error.hpp"
#include "fgb/rational.hpp"
#include "fgb/relation.hpp"
#include "fgb/rng.hpp"
#include "fgb/word.hpp"
