#include "cst/rng.hpp"

// Header-only; this TU pins the header into the build.
