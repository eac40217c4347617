#pragma once

#include "betaspec/admissibility.hpp"
#include "betaspec/beta_base.hpp"
#include "betaspec/birkhoff.hpp"
#include "betaspec/box_dimension.hpp"
#include "betaspec/cantor.hpp"
#include "betaspec/cylinder.hpp"
#include "betaspec/errors.hpp"
#include "betaspec/expansion.hpp"
#include "betaspec/observable.hpp"
#include "betaspec/parallel.hpp"
#include "betaspec/parry_approx.hpp"
#include "betaspec/parry_density.hpp"
#include "betaspec/real.hpp"
#include "betaspec/spectrum.hpp"
#include "betaspec/word.hpp"
