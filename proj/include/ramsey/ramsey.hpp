#pragma once

#include "ramsey/bundle.hpp"
#include "ramsey/cnc.hpp"
#include "ramsey/cnf.hpp"
#include "ramsey/encode.hpp"
#include "ramsey/graph.hpp"
#include "ramsey/orderly.hpp"
#include "ramsey/proofcheck.hpp"
#include "ramsey/solver.hpp"
