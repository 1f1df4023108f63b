#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pointnls {

/// Nonlinearity power sigma, coupling beta (> 0 focusing) and frame lambda.
struct ModelParams {
    double sigma = 1.0;
    double beta = 1.0;
    double lambda = 1.0;

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (!(sigma > 0.0) || !std::isfinite(sigma)) v.push_back("sigma must be positive");
        if (!(beta != 0.0) || !std::isfinite(beta)) v.push_back("beta must be nonzero");
        if (!(lambda > 0.0) || !std::isfinite(lambda)) v.push_back("lambda must be positive");
        return v;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError(std::move(v));
    }

    /// Below the range where well-posedness is known.
    bool below_wellposed_range() const { return sigma < 0.5; }
    bool focusing() const { return beta > 0.0; }

    bool operator==(const ModelParams&) const = default;
};

}  // namespace pointnls
