// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ssm/flop_model.hpp"
#include "ssm/precoder_opt.hpp"
#include "ssm/secrecy_metrics.hpp"
#include "ssm/sim_harness.hpp"
#include "ssm/sm_model.hpp"
#include "ssm/types.hpp"
