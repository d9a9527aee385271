#pragma once

#include "vgc/error.hpp"
#include "vgc/layout.hpp"
#include "vgc/object_model.hpp"
#include "vgc/checkpoint.hpp"
#include "vgc/zones.hpp"
#include "vgc/yield.hpp"
#include "vgc/ppe.hpp"
#include "vgc/bench.hpp"
#include "vgc/config.hpp"
