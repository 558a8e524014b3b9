#pragma once

#include "qrobust/certification.hpp"
#include "qrobust/errors.hpp"
#include "qrobust/lbfgs.hpp"
#include "qrobust/linalg.hpp"
#include "qrobust/parallel.hpp"
#include "qrobust/random.hpp"
#include "qrobust/sensitivity.hpp"
#include "qrobust/spin.hpp"
#include "qrobust/synthesis.hpp"
#include "qrobust/system.hpp"
#include "qrobust/uncertainty.hpp"
