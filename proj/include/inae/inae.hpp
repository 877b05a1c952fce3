#pragma once

#include "inae/common.hpp"
#include "inae/dataset.hpp"
#include "inae/diffusion.hpp"
#include "inae/graph.hpp"
#include "inae/metrics.hpp"
#include "inae/model.hpp"
#include "inae/plot.hpp"
#include "inae/run_config.hpp"
#include "inae/serialization.hpp"
#include "inae/trainer.hpp"
