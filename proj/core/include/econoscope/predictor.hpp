#pragma once

#include "econoscope/domain.hpp"

namespace econoscope {

/// Anything that maps a round-start state to game outcome probabilities:
/// trained models, the Monte Carlo oracle, test stubs. Implementations must
/// be safe to call concurrently and deterministic for a fixed object.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual OutcomeDistribution predict(const RoundState& state) const = 0;
};

}  // namespace econoscope
