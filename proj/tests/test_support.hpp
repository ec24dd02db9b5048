// SPDX-License-Identifier: Apache-2.0
//
// irsbs: simulator and reflection optimizer for radome-integrated reflecting surfaces
// Copyright (C) 2026 The irsbs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#ifndef IRSBS_TEST_SUPPORT_HPP
#define IRSBS_TEST_SUPPORT_HPP

#include "irsbs/irsbs.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

namespace irsbs_test
{
    using irsbs::cd;

    // Small but nondegenerate setup that keeps tests fast
    inline irsbs::SimConfig small_config()
    {
        irsbs::SimConfig c;
        c.N_j2 = {4, 4, 4, 4};
        c.K = 2;
        c.L_k = 3;
        return c;
    }

    inline Eigen::MatrixXcd random_matrix(int rows, int cols, std::mt19937_64 &gen, double scale = 1.0)
    {
        std::normal_distribution<double> n(0.0, scale);
        Eigen::MatrixXcd m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                m(i, j) = cd(n(gen), n(gen));
        return m;
    }

    inline cd random_phasor(std::mt19937_64 &gen)
    {
        std::uniform_real_distribution<double> u(0.0, 2.0 * irsbs::pi);
        return std::polar(1.0, u(gen));
    }

    // log2 det through an LU factorization (independent of the Cholesky route)
    inline double log2det_lu(const Eigen::MatrixXcd &X)
    {
        return std::log2(std::abs(Eigen::PartialPivLU<Eigen::MatrixXcd>(X).determinant()));
    }
}

#endif
