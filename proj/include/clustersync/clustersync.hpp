#pragma once

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/cluster_detect.hpp"
#include "clustersync/config.hpp"
#include "clustersync/dde.hpp"
#include "clustersync/errors.hpp"
#include "clustersync/experiments.hpp"
#include "clustersync/fourier_series.hpp"
#include "clustersync/io.hpp"
#include "clustersync/oscillator.hpp"
#include "clustersync/parallel.hpp"
#include "clustersync/phase_reduction.hpp"
#include "clustersync/spectrum.hpp"
#include "clustersync/sweep.hpp"
#include "clustersync/tables.hpp"
#include "clustersync/topology.hpp"
