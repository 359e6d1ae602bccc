#include "spdelab/version.hpp"

namespace spdelab {

const char* version_string() { return "0.1.0"; }

const char* rng_algorithm_id() { return "splitmix64-counter/box-muller/v1"; }

} // namespace spdelab
