#pragma once

#include "ccn/ccn_codec.hpp"
#include "ccn/channels.hpp"
#include "ccn/config.hpp"
#include "ccn/errors.hpp"
#include "ccn/galois.hpp"
#include "ccn/interleaver.hpp"
#include "ccn/model_io.hpp"
#include "ccn/neural_net.hpp"
#include "ccn/normal_approx.hpp"
#include "ccn/reed_solomon.hpp"
#include "ccn/rng.hpp"
#include "ccn/rs_selftest.hpp"
#include "ccn/sim_harness.hpp"
#include "ccn/stats.hpp"
#include "ccn/trainer.hpp"
