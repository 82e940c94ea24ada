#pragma once

#include "cognatree/cognate_matrix.hpp"
#include "cognatree/config.hpp"
#include "cognatree/dataset.hpp"
#include "cognatree/encode.hpp"
#include "cognatree/error.hpp"
#include "cognatree/experiment_config.hpp"
#include "cognatree/experiments.hpp"
#include "cognatree/inference.hpp"
#include "cognatree/phylogeny.hpp"
#include "cognatree/sampling.hpp"
#include "cognatree/stats.hpp"
#include "cognatree/tree_distance.hpp"
