#pragma once

#include "cellspace/errors.hpp"
#include "cellspace/rational.hpp"
#include "cellspace/laminar.hpp"
#include "cellspace/spaces.hpp"
#include "cellspace/metrics.hpp"
#include "cellspace/analysis.hpp"
#include "cellspace/quasisym.hpp"
#include "cellspace/io.hpp"
