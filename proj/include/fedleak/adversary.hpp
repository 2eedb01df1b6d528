#pragma once

#include "fedleak/adversary/attacks.hpp"
#include "fedleak/adversary/metrics.hpp"
#include "fedleak/adversary/view.hpp"
