#pragma once

// Umbrella header: tabular MDPs with random transition kernels, regret-aware
// planning, discrete information measures, rate-distortion attack design and
// victim-side learning experiments.

#include "rdmdp/core.hpp"
#include "rdmdp/mdp.hpp"
#include "rdmdp/ensemble.hpp"
#include "rdmdp/planning.hpp"
#include "rdmdp/info_theory.hpp"
#include "rdmdp/attack.hpp"
#include "rdmdp/environments.hpp"
#include "rdmdp/learning.hpp"
#include "rdmdp/serialization.hpp"
