#pragma once

#include "tom/model.hpp"

namespace tom {

// f(x) and f'(x) for one item. For power signals with r < 1 the derivative
// blows up at x = 0; that case is tagged rather than returned as infinity so
// callers assembling Jacobians must deal with it explicitly.
struct SignalEval {
    double value = 0.0;
    double derivative = 0.0;
    bool singular = false;
};

SignalEval eval_signal(const SignalSpec& sig, double appeal_i, double x);

}  // namespace tom
