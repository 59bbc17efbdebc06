#pragma once

#include "regpos/types.hpp"

#include <cstdint>
#include <random>

namespace regpos {

using Rng = std::mt19937_64;

/// Independent generator for the substream (seed, stream). Monte Carlo trials
/// use one stream per trial index so results do not depend on thread count.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// rows x cols standard Gaussian matrix, filled column by column. A prefix of
/// columns drawn from the same stream is therefore identical for any `cols`.
Mat gaussian_matrix(Rng& rng, int rows, int cols);

Vec gaussian_vector(Rng& rng, int n);

double uniform01(Rng& rng);

}  // namespace regpos
