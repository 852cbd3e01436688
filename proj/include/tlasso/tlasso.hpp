#pragma once

#include <tlasso/analysis.hpp>
#include <tlasso/dantzig.hpp>
#include <tlasso/ensembles.hpp>
#include <tlasso/errors.hpp>
#include <tlasso/io.hpp>
#include <tlasso/lasso_path.hpp>
#include <tlasso/metrics.hpp>
#include <tlasso/model.hpp>
#include <tlasso/procedures.hpp>
#include <tlasso/refit.hpp>
#include <tlasso/rng.hpp>
#include <tlasso/types.hpp>
