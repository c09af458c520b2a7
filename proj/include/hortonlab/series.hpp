#pragma once

#include <string>
#include <vector>

namespace hortonlab {

// Values at integer times 0, 1, ..., n-1; linear interpolation in between.
struct TimeSeries {
    std::vector<double> values;
};

// Piecewise-linear function through (times[i], values[i]).
struct Excursion {
    std::vector<double> times;
    std::vector<double> values;
};

// C(s) on a grid; se is filled for Monte Carlo estimates, terms for the series.
struct WidthSeries {
    std::vector<double> s;
    std::vector<double> c;
    std::vector<double> se;
    std::vector<int> terms;
    std::string method;  // series | ode | closed-form | monte-carlo
};

}  // namespace hortonlab
