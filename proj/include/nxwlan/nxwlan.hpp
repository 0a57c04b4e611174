#pragma once

// Umbrella header for the neighborhood-extensible WLAN simulator library.

#include "nxwlan/codec.hpp"
#include "nxwlan/control.hpp"
#include "nxwlan/dot11_switch.hpp"
#include "nxwlan/errors.hpp"
#include "nxwlan/event.hpp"
#include "nxwlan/experiments.hpp"
#include "nxwlan/frame.hpp"
#include "nxwlan/mac.hpp"
#include "nxwlan/metrics.hpp"
#include "nxwlan/radio.hpp"
#include "nxwlan/scenario.hpp"
#include "nxwlan/sim.hpp"
#include "nxwlan/steering.hpp"
