#pragma once

#include "mod2t/background_model.hpp"
#include "mod2t/blob_tracker.hpp"
#include "mod2t/errors.hpp"
#include "mod2t/fusion.hpp"
#include "mod2t/geometry.hpp"
#include "mod2t/hungarian.hpp"
#include "mod2t/image.hpp"
#include "mod2t/image_io.hpp"
#include "mod2t/metrics.hpp"
#include "mod2t/morphology.hpp"
#include "mod2t/motion_judge.hpp"
#include "mod2t/pipeline.hpp"
#include "mod2t/registration.hpp"
#include "mod2t/run_config.hpp"
#include "mod2t/synthetic.hpp"
#include "mod2t/track_io.hpp"
