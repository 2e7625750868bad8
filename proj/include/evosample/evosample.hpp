#pragma once

// Umbrella header: evolving bagged tree ensembles by perturbing their
// row bags (sub-sampling) or feature subsets (sub-spacing) under one of
// three error-based fitness functions.

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"
#include "evosample/evolve.hpp"
#include "evosample/experiment.hpp"
#include "evosample/fitness.hpp"
#include "evosample/fitness_kind.hpp"
#include "evosample/genome.hpp"
#include "evosample/rng.hpp"
#include "evosample/selfcheck.hpp"
#include "evosample/serialize.hpp"
#include "evosample/stats.hpp"
#include "evosample/tree.hpp"
#include "evosample/version.hpp"
