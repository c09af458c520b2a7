#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "hortonlab/samplers.hpp"
#include "hortonlab/series.hpp"
#include "hortonlab/tree.hpp"

namespace hortonlab {

// Depth-first contour of an embedded tree with lengths: slopes +-1, one
// breakpoint per extremum, ending at 2 * total_length.
Excursion harris_path(const Tree& tree);

struct LevelSetResult {
    Tree tree;
    bool ties = false;  // plateaus or repeated minimum values were collapsed
};

// Level set tree of an excursion (values >= 0, zero at both ends). Left
// subtrees come earlier in time.
LevelSetResult level_set_tree(const Excursion& x, double root_stem_length = 0.0);
// Meander version: boundary maxima are leaves; an interior global minimum
// gets an artificial root whose stem carries root_stem_length.
LevelSetResult level_set_tree(const TimeSeries& x, double root_stem_length = 0.0);

// Extrema only, with times rebuilt from unit slopes starting at the first time.
Excursion canonical_excursion(const Excursion& x);

// Keeps the endpoints and the interior local minima.
Excursion local_minima_series(const Excursion& x);
TimeSeries local_minima_series(const TimeSeries& x);

// Each l with X_{l+1} > X_l and a later first index r with X_r <= X_l gives the
// excursion of the interpolation on [l, r~], X_{r~} = X_l, shifted to baseline 0.
// Times are 0-based series indices.
std::vector<Excursion> extract_excursions(const TimeSeries& series);

// Parameters of the walk formed by the local minima of a {rho, lu, ld} walk.
WalkParams minima_kernel(const WalkParams& params);

// Re f(2s) - |f(s) / (2 - f(s))|^2 for a characteristic function f.
std::vector<double> char_identity_residuals(const std::function<std::complex<double>(double)>& fhat,
                                            const std::vector<double>& s_values);
// Same with f(s) = lambda / (lambda - i s).
std::vector<double> verify_char_identity(double lambda, const std::vector<double>& s_values);

}  // namespace hortonlab
