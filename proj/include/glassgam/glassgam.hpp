#pragma once

// Convenience umbrella: pulls in the whole toolkit.

#include "glassgam/binning.hpp"
#include "glassgam/commands.hpp"
#include "glassgam/common.hpp"
#include "glassgam/config.hpp"
#include "glassgam/dataset.hpp"
#include "glassgam/frechet.hpp"
#include "glassgam/logreg.hpp"
#include "glassgam/metrics.hpp"
#include "glassgam/model.hpp"
#include "glassgam/model_io.hpp"
#include "glassgam/robustness.hpp"
#include "glassgam/splits.hpp"
#include "glassgam/svg.hpp"
#include "glassgam/synthetic.hpp"
#include "glassgam/train.hpp"
