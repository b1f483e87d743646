#pragma once

#include "jigsaw3d/attention.hpp"
#include "jigsaw3d/attention_checks.hpp"
#include "jigsaw3d/bake.hpp"
#include "jigsaw3d/camera.hpp"
#include "jigsaw3d/dataset.hpp"
#include "jigsaw3d/error.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/mesh.hpp"
#include "jigsaw3d/png_io.hpp"
#include "jigsaw3d/primitives.hpp"
#include "jigsaw3d/raster.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/roundtrip.hpp"
#include "jigsaw3d/serialize.hpp"
#include "jigsaw3d/kdtree.hpp"
#include "jigsaw3d/style_metrics.hpp"
