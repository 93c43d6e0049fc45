#include "tom/signals.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tom {

SignalEval eval_signal(const SignalSpec& sig, double appeal_i, double x) {
    if (x < 0.0 || x > 1.0)
        throw std::domain_error("eval_signal: share outside [0,1]");

    SignalEval out;
    if (sig.kind == SignalSpec::Kind::Affine) {
        out.value = sig.beta * x + sig.alpha * appeal_i;
        out.derivative = sig.beta;
        return out;
    }

    const double r = sig.r;
    if (x == 0.0) {
        out.value = 0.0;  // 0^r := 0 for every r > 0
        if (r < 1.0) {
            out.singular = true;
            out.derivative = std::numeric_limits<double>::quiet_NaN();
        } else {
            out.derivative = (r == 1.0) ? 1.0 : 0.0;
        }
        return out;
    }
    out.value = std::pow(x, r);
    out.derivative = r * std::pow(x, r - 1.0);
    return out;
}

}  // namespace tom
