#pragma once

#include "toposeg/assignment.hpp"
#include "toposeg/config.hpp"
#include "toposeg/error.hpp"
#include "toposeg/feature_extractor.hpp"
#include "toposeg/gan_losses.hpp"
#include "toposeg/grid.hpp"
#include "toposeg/image.hpp"
#include "toposeg/image_io.hpp"
#include "toposeg/losses.hpp"
#include "toposeg/matching.hpp"
#include "toposeg/metrics.hpp"
#include "toposeg/optimize.hpp"
#include "toposeg/persistence.hpp"
#include "toposeg/serialize.hpp"
#include "toposeg/skeleton.hpp"
