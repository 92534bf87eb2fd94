#pragma once

#include "lcgm/decomp.hpp"
#include "lcgm/error.hpp"
#include "lcgm/graph.hpp"
#include "lcgm/integrate.hpp"
#include "lcgm/io.hpp"
#include "lcgm/mle.hpp"
#include "lcgm/objective.hpp"
#include "lcgm/polytope.hpp"
#include "lcgm/rational.hpp"
#include "lcgm/refine.hpp"
#include "lcgm/sample.hpp"
#include "lcgm/support.hpp"
#include "lcgm/tent.hpp"
