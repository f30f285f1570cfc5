#pragma once

#include "ising/coarse.hpp"
#include "ising/exact.hpp"
#include "ising/kernel.hpp"
#include "ising/lattice.hpp"
#include "ising/mean_field.hpp"
#include "ising/monte_carlo.hpp"
#include "ising/perturb.hpp"
