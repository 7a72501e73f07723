#pragma once

#include "goalrba/admm.hpp"
#include "goalrba/allocator.hpp"
#include "goalrba/channel.hpp"
#include "goalrba/config.hpp"
#include "goalrba/dataset.hpp"
#include "goalrba/decision.hpp"
#include "goalrba/errors.hpp"
#include "goalrba/harness.hpp"
#include "goalrba/learning.hpp"
#include "goalrba/mlp.hpp"
#include "goalrba/random.hpp"
#include "goalrba/workload.hpp"
#include "goalrba/verify.hpp"
