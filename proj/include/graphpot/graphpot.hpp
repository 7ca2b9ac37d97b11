#pragma once

#include "graphpot/error.hpp"
#include "graphpot/graph.hpp"
#include "graphpot/generators.hpp"
#include "graphpot/green.hpp"
#include "graphpot/potentials.hpp"
#include "graphpot/calderon.hpp"
#include "graphpot/bvp.hpp"
#include "graphpot/np_spectrum.hpp"
#include "graphpot/cloaking.hpp"
#include "graphpot/random_walk.hpp"
#include "graphpot/verify.hpp"
#include "graphpot/io.hpp"
