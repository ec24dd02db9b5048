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
#ifndef IRSBS_RATE_HPP
#define IRSBS_RATE_HPP

#include "channel.hpp"
#include "config.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace irsbs
{
    struct RateParams
    {
        double P = 1.0;      // W
        double sigma2 = 1.0; // W

        static RateParams from(const SimConfig &cfg) { return {cfg.power_w(), cfg.noise_w()}; }
        double snr() const { return P / sigma2; }

        void validate() const
        {
            if (!(P > 0.0) || !(sigma2 > 0.0) || !std::isfinite(P) || !std::isfinite(sigma2))
                throw std::invalid_argument("RateParams: P and sigma2 must be finite and > 0");
        }
    };

    // log2 det of a Hermitian positive definite matrix, symmetrized first
    inline double log2det_hpd(const Eigen::MatrixXcd &X)
    {
        const Eigen::MatrixXcd S = 0.5 * (X + X.adjoint());
        Eigen::LLT<Eigen::MatrixXcd> llt(S);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("log2det_hpd: matrix is not positive definite");
        double sum = 0.0;
        const auto &L = llt.matrixLLT();
        for (Eigen::Index i = 0; i < L.rows(); ++i)
            sum += std::log(L(i, i).real());
        return 2.0 * sum / std::numbers::ln2;
    }

    // log2 det(I_M + snr * H H^H) with H = [h_1 ... h_K] (M x K).
    // Uses the smaller of the two Gram matrices (Sylvester's identity).
    inline double sum_rate(const Eigen::MatrixXcd &H, const RateParams &params)
    {
        params.validate();
        if (H.rows() < 1 || H.cols() < 1)
            throw std::invalid_argument("sum_rate: need at least one antenna and one user");
        if (!H.allFinite())
            throw std::invalid_argument("sum_rate: non-finite channel entry");
        const double snr = params.snr();
        Eigen::MatrixXcd gram;
        if (H.cols() < H.rows())
            gram = H.adjoint() * H;
        else
            gram = H * H.adjoint();
        gram *= snr;
        gram.diagonal().array() += 1.0;
        return std::max(0.0, log2det_hpd(gram));
    }

    // The only channel access available to CSI-free optimizers: effective channels for a trial state
    class ChannelOracle
    {
    public:
        ChannelOracle(std::shared_ptr<const ChannelTensors> tensors, RateParams params)
            : tensors_(std::move(tensors)), params_(params)
        {
            if (!tensors_)
                throw std::invalid_argument("ChannelOracle: null tensors");
            params_.validate();
        }

        Eigen::MatrixXcd query(const ReflectionState &theta)
        {
            ++queries_;
            return assemble_effective_channel(*tensors_, theta);
        }

        double rate(const ReflectionState &theta) { return sum_rate(query(theta), params_); }

        std::uint64_t queries() const { return queries_; }
        int units() const { return tensors_->units(); }
        const std::vector<UnitSurface> &surfaces() const { return tensors_->surfaces; }
        const RateParams &params() const { return params_; }

        // Fresh counter, shared immutable tensors
        ChannelOracle clone() const { return ChannelOracle(tensors_, params_); }

    private:
        std::shared_ptr<const ChannelTensors> tensors_;
        RateParams params_;
        std::uint64_t queries_ = 0;
    };

    inline ChannelOracle make_oracle(ChannelTensors tensors, const RateParams &params)
    {
        return ChannelOracle(std::make_shared<const ChannelTensors>(std::move(tensors)), params);
    }

    inline ChannelOracle make_oracle(std::shared_ptr<const ChannelTensors> tensors, const RateParams &params)
    {
        return ChannelOracle(std::move(tensors), params);
    }
}

#endif
