#pragma once

#include "survhsic/baselines.hpp"
#include "survhsic/dataset.hpp"
#include "survhsic/error.hpp"
#include "survhsic/experiment.hpp"
#include "survhsic/io.hpp"
#include "survhsic/kaplan_meier.hpp"
#include "survhsic/kernels.hpp"
#include "survhsic/permutation.hpp"
#include "survhsic/procedures.hpp"
#include "survhsic/random.hpp"
#include "survhsic/scenarios.hpp"
#include "survhsic/statistics.hpp"
#include "survhsic/transport.hpp"
