#pragma once

#include "hfsurv/data.hpp"
#include "hfsurv/eda.hpp"
#include "hfsurv/ensemble.hpp"
#include "hfsurv/errors.hpp"
#include "hfsurv/metrics.hpp"
#include "hfsurv/pipeline.hpp"
#include "hfsurv/random.hpp"
#include "hfsurv/scaler.hpp"
#include "hfsurv/split.hpp"
#include "hfsurv/tree.hpp"
#include "hfsurv/tune.hpp"
#include "hfsurv/version.hpp"
