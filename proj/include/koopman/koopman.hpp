#pragma once

// Data-driven linear (Koopman) models of nonlinear dynamics: benchmark
// systems and integration, snapshot handling, DMD/EDMD fitting, LQR for
// generating controlled datasets, and reconstruction-error metrics.

#include "koopman/control.hpp"
#include "koopman/dmd.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/metrics.hpp"
#include "koopman/model_io.hpp"
#include "koopman/pipeline.hpp"
#include "koopman/repro.hpp"
#include "koopman/snapshots.hpp"
#include "koopman/trajectory_io.hpp"
