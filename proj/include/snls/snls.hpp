#ifndef SNLS_SNLS_HPP
#define SNLS_SNLS_HPP

#include "snls/classify.hpp"
#include "snls/evolution.hpp"
#include "snls/functionals.hpp"
#include "snls/grid.hpp"
#include "snls/groundstate.hpp"
#include "snls/io.hpp"
#include "snls/spectral.hpp"
#include "snls/weights.hpp"

#endif
