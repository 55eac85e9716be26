#ifndef MAXSUM_MAXSUM_HPP
#define MAXSUM_MAXSUM_HPP

#include "maxsum/elimination.hpp"
#include "maxsum/errors.hpp"
#include "maxsum/factor.hpp"
#include "maxsum/lp.hpp"
#include "maxsum/model.hpp"
#include "maxsum/ordering.hpp"
#include "maxsum/search.hpp"
#include "maxsum/uai.hpp"

#endif  // MAXSUM_MAXSUM_HPP
