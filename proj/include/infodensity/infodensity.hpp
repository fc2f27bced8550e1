#pragma once

#include "infodensity/error.hpp"
#include "infodensity/homogeneous.hpp"
#include "infodensity/info_measures.hpp"
#include "infodensity/linalg.hpp"
#include "infodensity/loops.hpp"
#include "infodensity/model.hpp"
#include "infodensity/philox.hpp"
#include "infodensity/sampling.hpp"
#include "infodensity/two_block.hpp"
