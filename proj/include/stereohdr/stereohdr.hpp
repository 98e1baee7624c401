// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include "stereohdr/camera.hpp"
#include "stereohdr/disparity.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/fusion.hpp"
#include "stereohdr/histogram.hpp"
#include "stereohdr/icrf_estimation.hpp"
#include "stereohdr/image.hpp"
#include "stereohdr/interval.hpp"
#include "stereohdr/io.hpp"
#include "stereohdr/pipeline.hpp"
#include "stereohdr/planner.hpp"
#include "stereohdr/radiance_estimation.hpp"
#include "stereohdr/rng.hpp"
#include "stereohdr/scene.hpp"
