#pragma once

#include "imcf/errors.hpp"
#include "imcf/warp.hpp"
#include "imcf/manifold.hpp"
#include "imcf/geometry.hpp"
#include "imcf/flow.hpp"
#include "imcf/verify.hpp"
#include "imcf/config.hpp"
#include "imcf/io.hpp"
#include "imcf/cli.hpp"
