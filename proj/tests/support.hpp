/**
 * @file support.hpp
 * @brief Model factories and assertion helpers shared by the test binaries
 */

#pragma once

#include "mvcone/cones.hpp"
#include "mvcone/errors.hpp"
#include "mvcone/model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace mvcone::testing {

inline LevyModel black_scholes(double b = 0.08, double c = 0.04, double horizon = 1.0) {
    return build_levy_model(1, Vector::Constant(1, b), Matrix::Constant(1, 1, c), {}, horizon);
}

inline LevyModel poisson(double lambda = 1.0, double horizon = 1.0, double drift = -1.0) {
    // Default drift equals λ·u with u = 1, i.e. the continuous part is zero.
    const double b = drift < 0.0 ? lambda : drift;
    return build_levy_model(1, Vector::Constant(1, b), Matrix::Zero(1, 1), {{Vector::Constant(1, 1.0), lambda}}, horizon);
}

inline Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double x : row) m(r, c++) = x;
        ++r;
    }
    return m;
}

inline Vector random_vector(std::mt19937_64& gen, int d, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = n(gen);
    return v;
}

/// Random Lévy model: diffusion, jumps, or both. Drift small enough that
/// L stays well inside (0, 1] on [0, 1].
inline LevyModel random_model(std::mt19937_64& gen, int d, bool diffusion, bool jumps) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Matrix c = Matrix::Zero(d, d);
    if (diffusion) {
        const Matrix a = Matrix::NullaryExpr(d, d, [&]() { return 0.25 * (u01(gen) - 0.5); });
        c = a * a.transpose() + 0.01 * Matrix::Identity(d, d);
    }
    std::vector<JumpAtom> atoms;
    if (jumps) {
        const int k = 1 + static_cast<int>(u01(gen) * 2.0);
        for (int j = 0; j < k; ++j) atoms.push_back({random_vector(gen, d, 0.3), 0.2 + 0.8 * u01(gen)});
        if (!diffusion) {
            // Enough jump directions for a bounded unconstrained problem.
            for (int i = 0; i < d; ++i) {
                Vector e = Vector::Zero(d);
                e(i) = (u01(gen) < 0.5 ? -0.2 : 0.25);
                atoms.push_back({e, 0.5 + u01(gen)});
            }
        }
    }
    Vector b = random_vector(gen, d, 0.06);
    return build_levy_model(d, b, c, atoms, 1.0);
}

}  // namespace mvcone::testing

/// Asserts that `stmt` throws mvcone::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                                   \
    do {                                                                                         \
        bool thrown_ = false;                                                                    \
        try {                                                                                    \
            stmt;                                                                                \
        } catch (const ::mvcone::Error& e_) {                                                    \
            thrown_ = true;                                                                      \
            EXPECT_EQ(e_.code(), expected_code) << e_.what();                                    \
        }                                                                                        \
        EXPECT_TRUE(thrown_) << "expected " << ::mvcone::to_string(expected_code) << " from " #stmt; \
    } while (0)
