#ifndef SPPCA_SPPCA_HPP
#define SPPCA_SPPCA_HPP

#include "sppca/baseline_pca.hpp"
#include "sppca/datagen.hpp"
#include "sppca/evaluation.hpp"
#include "sppca/io.hpp"
#include "sppca/numerics.hpp"
#include "sppca/ppca.hpp"
#include "sppca/rng.hpp"
#include "sppca/sp_ppca.hpp"
#include "sppca/types.hpp"

#endif
