#pragma once

#include "common.hpp"
#include "geometry.hpp"
#include "grad.hpp"
#include "image.hpp"
#include "io.hpp"
#include "masks.hpp"
#include "metrics.hpp"
#include "microlocal.hpp"
#include "phantoms.hpp"
#include "pngio.hpp"
#include "rng.hpp"
#include "unrolled.hpp"
#include "wavelet.hpp"
#include "xray.hpp"
