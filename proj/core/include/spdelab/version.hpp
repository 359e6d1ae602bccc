#pragma once

namespace spdelab {

// Reported in result manifests so outputs can be traced to a build.
const char* version_string();

// Identifier of the RNG algorithm and stream-derivation rule; fixed so that
// archived results stay reproducible if the default generator ever changes.
const char* rng_algorithm_id();

} // namespace spdelab
