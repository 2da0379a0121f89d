#pragma once

#include "arterial/case_control.hpp"
#include "arterial/design.hpp"
#include "arterial/error.hpp"
#include "arterial/evaluation.hpp"
#include "arterial/features.hpp"
#include "arterial/io.hpp"
#include "arterial/likelihoods.hpp"
#include "arterial/mcmc.hpp"
#include "arterial/random.hpp"
#include "arterial/stats.hpp"
#include "arterial/synthetic_world.hpp"
#include "arterial/time.hpp"
