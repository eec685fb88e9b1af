#pragma once

#include "lpvm/numerics.hpp"
#include "lpvm/spectral.hpp"
#include "lpvm/phase_space.hpp"
#include "lpvm/majorant.hpp"
#include "lpvm/space_time.hpp"
#include "lpvm/characteristics.hpp"
#include "lpvm/fields.hpp"
#include "lpvm/fixed_point.hpp"
#include "lpvm/iteration_theory.hpp"
#include "lpvm/entropy.hpp"
#include "lpvm/diagnostics.hpp"
#include "lpvm/equilibria.hpp"
#include "lpvm/config.hpp"
#include "lpvm/initial.hpp"
#include "lpvm/run.hpp"
