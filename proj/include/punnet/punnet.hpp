#pragma once

// Umbrella header.

#include "punnet/checkpoint.hpp"
#include "punnet/common.hpp"
#include "punnet/config.hpp"
#include "punnet/data.hpp"
#include "punnet/encoder.hpp"
#include "punnet/fusion.hpp"
#include "punnet/gradcheck.hpp"
#include "punnet/heads.hpp"
#include "punnet/metrics.hpp"
#include "punnet/model.hpp"
#include "punnet/model_io.hpp"
#include "punnet/optim.hpp"
#include "punnet/phonattn.hpp"
#include "punnet/phonodict.hpp"
#include "punnet/rng.hpp"
#include "punnet/tensor.hpp"
#include "punnet/train.hpp"
#include "punnet/vocab.hpp"
