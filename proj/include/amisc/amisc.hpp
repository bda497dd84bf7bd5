#pragma once

#include "amisc/errors.hpp"
#include "amisc/multi_index.hpp"
#include "amisc/rules.hpp"
#include "amisc/tensor_grid.hpp"
#include "amisc/combination.hpp"
#include "amisc/pce.hpp"
#include "amisc/ensemble.hpp"
#include "amisc/models.hpp"
#include "amisc/advection_diffusion.hpp"
#include "amisc/misc.hpp"
#include "amisc/amisc_driver.hpp"
#include "amisc/adaptive_sparse_grid.hpp"
