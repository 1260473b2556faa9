#pragma once

#include <stdexcept>
#include <string>

namespace upbtiles {

// Thrown when a root of unity of order n is requested in a field whose
// order is not a multiple of n, or when an order is not positive.
struct invalid_order_error : std::invalid_argument {
    explicit invalid_order_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown on shape mismatches: vectors of different length, matrices with
// incompatible dimensions, scalars from different fields combined directly.
struct dimension_mismatch_error : std::invalid_argument {
    explicit dimension_mismatch_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when an input violates a structural precondition (zero vector where
// a state is required, non-tile-constant extra state, malformed tile data).
struct degenerate_input_error : std::invalid_argument {
    explicit degenerate_input_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a yes/no question is asked of an analysis that ended
// INCONCLUSIVE, so neither answer would be sound.
struct inconclusive_error : std::runtime_error {
    explicit inconclusive_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a named builtin instance does not exist.
struct unknown_instance_error : std::invalid_argument {
    explicit unknown_instance_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a checkpoint file is unreadable or inconsistent with the
// search configuration it is resumed against.
struct checkpoint_error : std::runtime_error {
    explicit checkpoint_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace upbtiles
