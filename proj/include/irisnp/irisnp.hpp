#pragma once

#include "irisnp/chain.hpp"
#include "irisnp/counterexample.hpp"
#include "irisnp/ellipsoid.hpp"
#include "irisnp/iris.hpp"
#include "irisnp/linprog.hpp"
#include "irisnp/mvie.hpp"
#include "irisnp/nlp.hpp"
#include "irisnp/polytope.hpp"
#include "irisnp/rng.hpp"
#include "irisnp/sampling.hpp"
#include "irisnp/shapes.hpp"
#include "irisnp/transform.hpp"
