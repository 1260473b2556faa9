#pragma once

#include <gmpxx.h>

#include <string>

#include "upbtiles/errors.hpp"

namespace upbtiles {

using Int = mpz_class;
using Rat = mpq_class;

// Parses "p", "-p" or "p/q" into a rational in lowest terms.
inline Rat rat_from_string(const std::string& s) {
    if (s.empty()) throw degenerate_input_error("empty rational literal");
    Rat r;
    if (r.set_str(s, 10) != 0 || r.get_den() == 0)
        throw degenerate_input_error("bad rational literal: " + s);
    r.canonicalize();
    return r;
}

// Lowest-terms decimal form, "p" when the denominator is 1, else "p/q".
inline std::string rat_to_string(const Rat& r) {
    return r.get_str(10);
}

inline long lcm_long(long a, long b) {
    mpz_class g;
    mpz_lcm(g.get_mpz_t(), mpz_class(a).get_mpz_t(), mpz_class(b).get_mpz_t());
    return g.get_si();
}

}  // namespace upbtiles
