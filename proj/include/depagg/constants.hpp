#pragma once

// Reference constants used by `reproduce` and the acceptance checks.
// Keep every such number in this one file.

#include <array>

namespace depagg::reference {

// ---- Three-judge motivating example, shared couplings ----
inline constexpr std::array<std::array<double, 3>, 3> kSharedW = {{
    {0.0, -2.7496, 4.4583},
    {-2.7496, 0.0, -4.8249},
    {4.4583, -4.8249, 0.0},
}};
inline constexpr std::array<double, 3> kSharedH0 = {-1.7447, 2.2991, 3.5085};
inline constexpr std::array<double, 3> kSharedH1 = {-2.0094, 0.1721, -2.7597};
inline constexpr double kMotivatingPi = 0.5;

// Reference Pr(J | Y=0), Pr(J | Y=1) in lexicographic order (0,0,0), (0,0,1), ..., (1,1,1).
inline constexpr std::array<double, 8> kSharedTableY0 = {0.00181, 0.0603, 0.0180, 0.00483,
                                                         3.16e-4, 0.9099, 2.01e-4, 0.00465};
inline constexpr std::array<double, 8> kSharedTableY1 = {0.3196, 0.0202, 0.3796, 1.93e-4,
                                                         0.0428, 0.2342, 0.00325, 1.43e-4};
inline constexpr std::array<double, 3> kSharedMarginalsY0 = {0.9150, 0.0277, 0.9797};
inline constexpr std::array<double, 3> kSharedMarginalsY1 = {0.2804, 0.3832, 0.2548};
inline constexpr std::array<int, 3> kSharedQuery = {0, 1, 1};
inline constexpr double kSharedBayesPosterior = 0.038;
inline constexpr double kSharedCIPosterior = 0.968;

// ---- Three-judge motivating example, class-dependent couplings ----
inline constexpr std::array<std::array<double, 3>, 3> kClassDepW0 = {{
    {0.0, -2.4445, 2.4553},
    {-2.4445, 0.0, -2.9206},
    {2.4553, -2.9206, 0.0},
}};
inline constexpr std::array<std::array<double, 3>, 3> kClassDepW1 = {{
    {0.0, -3.3637, 3.0718},
    {-3.3637, 0.0, -0.0677},
    {3.0718, -0.0677, 0.0},
}};
inline constexpr std::array<double, 3> kClassDepH0 = {2.7369, 1.3602, 1.9559};
inline constexpr std::array<double, 3> kClassDepH1 = {-2.5484, -2.2580, -0.9266};
inline constexpr std::array<int, 3> kClassDepQuery = {1, 1, 0};
inline constexpr double kClassDepLikY0 = 0.00393;
inline constexpr double kClassDepLikY1 = 1.24e-4;
inline constexpr double kClassDepBayesPosterior = 0.031;
inline constexpr double kClassDepCIPosterior = 0.957;

// ---- CI simulation setups (K = 6, n = 200 per trial, 20 trials) ----
inline constexpr int kCISetupItems = 200;
inline constexpr int kCISetupTrials = 20;
inline constexpr std::array<std::array<double, 6>, 4> kCISetupAlpha = {{
    {0.90, 0.90, 0.90, 0.90, 0.90, 0.90},
    {0.26, 0.53, 0.64, 0.50, 0.67, 0.70},
    {0.26, 0.30, 0.24, 0.50, 0.70, 0.80},
    {0.60, 0.63, 0.74, 0.75, 0.67, 0.80},
}};
inline constexpr std::array<std::array<double, 6>, 4> kCISetupBeta = {{
    {0.90, 0.90, 0.90, 0.95, 0.90, 0.95},
    {0.34, 0.54, 0.65, 0.76, 0.70, 0.30},
    {0.80, 0.90, 0.50, 0.60, 0.37, 0.23},
    {0.70, 0.59, 0.95, 0.86, 0.77, 0.83},
}};
inline constexpr std::array<double, 4> kCISetupWMV = {0.9970, 0.7260, 0.6110, 0.9300};
inline constexpr std::array<double, 4> kCISetupUMV = {0.9950, 0.5970, 0.5200, 0.9170};

// ---- Curie-Weiss separation runs ----
inline constexpr double kCWPi = 0.7;
inline constexpr double kCWBeta0 = 0.5;
inline constexpr double kCWH0 = -0.5;
inline constexpr double kCWBeta1 = 2.0;
inline constexpr double kCWC = 1.5;
inline constexpr int kCWItems = 1000;

// ---- Latent-factor separation runs ----
inline constexpr double kFactorPi = 0.7;
inline constexpr double kFactorA = 0.5;
inline constexpr double kFactorB = 1.0;
inline constexpr double kFactorLambda = 0.1;
inline constexpr double kFactorSigma2 = 1.0;
inline constexpr double kFactorLambdaAlt = 0.15;
inline constexpr double kFactorSigma2Alt = 1.5;
inline constexpr int kFactorItems = 1000;

}  // namespace depagg::reference
