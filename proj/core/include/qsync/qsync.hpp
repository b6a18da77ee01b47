#pragma once

#include "qsync/control.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/errors.hpp"
#include "qsync/experiments.hpp"
#include "qsync/measures.hpp"
#include "qsync/model.hpp"
#include "qsync/parallel.hpp"
#include "qsync/scenario.hpp"
