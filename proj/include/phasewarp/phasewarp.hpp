#pragma once

#include "phasewarp/density_est.hpp"
#include "phasewarp/dp_align.hpp"
#include "phasewarp/error.hpp"
#include "phasewarp/estimation.hpp"
#include "phasewarp/experiments.hpp"
#include "phasewarp/grid_fn.hpp"
#include "phasewarp/io.hpp"
#include "phasewarp/karcher.hpp"
#include "phasewarp/parallel.hpp"
#include "phasewarp/phase_metrics.hpp"
#include "phasewarp/point_process.hpp"
#include "phasewarp/random.hpp"
#include "phasewarp/warping.hpp"
