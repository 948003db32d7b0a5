#ifndef NVGYRO_NVGYRO_HPP
#define NVGYRO_NVGYRO_HPP

#include "nvgyro/analysis.hpp"
#include "nvgyro/calibration.hpp"
#include "nvgyro/config.hpp"
#include "nvgyro/control.hpp"
#include "nvgyro/environment.hpp"
#include "nvgyro/error.hpp"
#include "nvgyro/estimation.hpp"
#include "nvgyro/io.hpp"
#include "nvgyro/protocol.hpp"
#include "nvgyro/run.hpp"
#include "nvgyro/spin_model.hpp"

#endif
