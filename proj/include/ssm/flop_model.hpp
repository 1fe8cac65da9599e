// SPDX-License-Identifier: Apache-2.0
//
// Analytic FLOP counts of the three precoder designs. A complex
// matrix-vector product A x (A is m x n) costs 2mn, a matrix product 2mnp.
// Exponentials and logarithms are not counted.

#pragma once

#include "ssm/types.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace ssm::flops
{

enum class Method
{
    AsrEval,
    AsrGrad,
    MaxAsrGd,
    SrEval,
    SrGrad,
    MaxSrGd,
    SdpSub,
    MaxAsrSca
};

inline std::string_view to_string(Method m)
{
    switch (m)
    {
    case Method::AsrEval: return "AsrEval";
    case Method::AsrGrad: return "AsrGrad";
    case Method::MaxAsrGd: return "MaxAsrGd";
    case Method::SrEval: return "SrEval";
    case Method::SrGrad: return "SrGrad";
    case Method::MaxSrGd: return "MaxSrGd";
    case Method::SdpSub: return "SdpSub";
    case Method::MaxAsrSca: return "MaxAsrSca";
    }
    throw ConfigError("unknown FLOP method");
}

inline Method method_from_string(std::string_view s)
{
    for (Method m : {Method::AsrEval, Method::AsrGrad, Method::MaxAsrGd, Method::SrEval, Method::SrGrad,
                     Method::MaxSrGd, Method::SdpSub, Method::MaxAsrSca})
        if (to_string(m) == s)
            return m;
    throw ConfigError("unknown FLOP method: " + std::string(s));
}

struct ComplexityInputs
{
    int n_tx = 4;
    int n_b = 2;
    int n_e = 2;
    int order = 2; ///< M
    int d1 = 25;   ///< Max-ASR-GD iterations
    int d2 = 30;   ///< Max-SR-GD iterations
    int d3 = 8;    ///< Max-ASR-SCA outer iterations
    int n_samp = 500;
    double solver_accuracy = 1e-8; ///< interior-point accuracy of each SDP subproblem

    void validate() const
    {
        if (n_tx < 1 || n_b < 1 || n_e < 1 || order < 1 || d1 < 1 || d2 < 1 || d3 < 1 || n_samp < 1)
            throw ConfigError("complexity inputs must be positive");
        if (!(solver_accuracy > 0.0) || !(solver_accuracy < 1.0))
            throw ConfigError("solver accuracy must lie in (0, 1)");
    }
};

/// Literal evaluation of the per-method FLOP formulas. The interior-point
/// term N_t^4.5 log(1/accuracy) of SdpSub uses constant 1 and natural log.
inline double count(Method method, const ComplexityInputs& in)
{
    in.validate();
    const double nt = in.n_tx;
    const double nb = in.n_b;
    const double ne = in.n_e;
    const double m = in.order;
    const double ns = in.n_samp;
    const double base = 2.0 * m * m * nt * nt; // 2 M^2 N_t^2
    const double nt2 = nt * nt;
    const double nt3 = nt2 * nt;

    const double sdp = std::pow(nt, 4.5) * std::log(1.0 / in.solver_accuracy) + base * (3.0 * nt3 + 4.0 * nt2);
    switch (method)
    {
    case Method::AsrEval: return base * (4.0 * nt2 + nb + ne);
    case Method::AsrGrad: return base * (3.0 * nt2 + 2.0 * nt2 + 2.0 * nt + 2.0 * nt2);
    case Method::MaxAsrGd: return in.d1 * base * (11.0 * nt2 + 2.0 * nt + nb + ne);
    case Method::SrEval: return 2.0 * base * ns * (2.0 * nt2 + nb + ne);
    case Method::SrGrad: return base * ns * (3.0 * nt2 + 2.0 * nt2 + 2.0 * nt + 2.0 * nt2);
    // 2N_b + 2N_e here versus N_b + N_e in MaxAsrGd is kept as published
    case Method::MaxSrGd: return in.d2 * base * ns * (11.0 * nt2 + 2.0 * nt + 2.0 * nb + 2.0 * ne);
    case Method::SdpSub: return sdp;
    case Method::MaxAsrSca: return in.d3 * sdp + in.d3 * base * (2.0 * nt3 + 3.0 * nt2);
    }
    throw ConfigError("unknown FLOP method");
}

} // namespace ssm::flops
