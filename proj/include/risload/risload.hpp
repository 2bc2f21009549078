// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risload/error.hpp"
#include "risload/scenario.hpp"
#include "risload/coupling.hpp"
#include "risload/cvxsub.hpp"
#include "risload/mm.hpp"
#include "risload/ica.hpp"
#include "risload/baselines.hpp"
#include "risload/scenario_io.hpp"
#include "risload/harness.hpp"
