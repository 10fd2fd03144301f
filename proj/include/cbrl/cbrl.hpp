#pragma once

#include "bandit.hpp"
#include "checkpoint.hpp"
#include "cmdqn.hpp"
#include "config.hpp"
#include "envs.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "replay_buffer.hpp"
#include "rng.hpp"
#include "stats.hpp"
