#pragma once

// Single include for the whole library.

#include "mvkit/camera.hpp"
#include "mvkit/circle_fit.hpp"
#include "mvkit/color.hpp"
#include "mvkit/condition.hpp"
#include "mvkit/curation.hpp"
#include "mvkit/depth_align.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/fundamental.hpp"
#include "mvkit/generators.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/io/camera_json.hpp"
#include "mvkit/io/csv.hpp"
#include "mvkit/io/flo.hpp"
#include "mvkit/io/guidance_json.hpp"
#include "mvkit/io/pfm.hpp"
#include "mvkit/io/ppm.hpp"
#include "mvkit/lwlr.hpp"
#include "mvkit/metrics.hpp"
#include "mvkit/parallel.hpp"
#include "mvkit/pipeline.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/schedule.hpp"
#include "mvkit/tracks.hpp"
#include "mvkit/warp.hpp"
