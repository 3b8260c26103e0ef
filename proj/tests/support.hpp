#pragma once

#include "nsrl/field.hpp"

#include <cmath>
#include <numbers>

namespace testing_support {

inline constexpr double pi = std::numbers::pi;

template <class Fn>
nsrl::ScalarField scalar(const nsrl::Grid& g, Fn&& fn)
{
    nsrl::ScalarField f(g);
    for (int k = 0; k < g.n(); ++k)
        for (int j = 0; j < g.n(); ++j)
            for (int i = 0; i < g.n(); ++i) f[g.index(i, j, k)] = fn(g.coord(i), g.coord(j), g.coord(k));
    return f;
}

template <class F0, class F1, class F2>
nsrl::VectorField vector(const nsrl::Grid& g, F0&& a, F1&& b, F2&& c)
{
    return nsrl::VectorField(scalar(g, a), scalar(g, b), scalar(g, c));
}

inline double max_diff(const nsrl::ScalarField& a, const nsrl::ScalarField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_diff(const nsrl::VectorField& a, const nsrl::VectorField& b)
{
    return std::max({max_diff(a[0], b[0]), max_diff(a[1], b[1]), max_diff(a[2], b[2])});
}

} // namespace testing_support
