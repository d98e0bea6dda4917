#pragma once

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"
#include "fastlight/polarization.hpp"
#include "fastlight/medium.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/signal.hpp"
#include "fastlight/propagation.hpp"
#include "fastlight/estimation.hpp"
#include "fastlight/signal_csv.hpp"
#include "fastlight/scenario.hpp"
#include "fastlight/commands.hpp"
