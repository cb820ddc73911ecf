#pragma once

#include "momadapt/adapt.hpp"
#include "momadapt/collision.hpp"
#include "momadapt/dg.hpp"
#include "momadapt/goal.hpp"
#include "momadapt/marking.hpp"
#include "momadapt/problems.hpp"
#include "momadapt/run.hpp"
#include "momadapt/solver.hpp"
#include "momadapt/velocity.hpp"
