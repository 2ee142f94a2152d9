#pragma once

#include "errors.hpp"
#include "grid_model.hpp"
#include "spectral.hpp"
#include "lyapunov.hpp"
#include "swing.hpp"
#include "h2.hpp"
#include "allocation.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "study.hpp"
