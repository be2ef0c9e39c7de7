"""Independent high-precision evaluation of the closed-form bounds.

Writes ../data/bounds_oracle.json: 100 grid points per operation, each with
the exact f64 inputs and the correctly rounded reference value. Inputs are
converted to mpmath from the same doubles the Rust code sees.

    python3 bounds_oracle.py
"""

import json
import random
from pathlib import Path

from mpmath import mp, mpf, exp, log, sqrt, floor

mp.dps = 60
POINTS = 100
# Relative error is only meaningful away from zero.
MIN_ABS = mpf("0.01")


def rate(e):
    return e * e / 2 - e ** 3 / 3


def min_dim(e, delta, count):
    # Least integer n with count*exp(-(n/2) rate) < delta.
    t = 2 / rate(e) * log(count / delta)
    n = int(floor(t)) + 1
    return max(n, 1)


def lo(g, e):
    return (1 + e) / (1 - e) * g - 2 * e / (1 - e)


def hi(g, e):
    return 1 - sqrt(1 - e * e) / (1 + e) + e / (1 + e) + (1 - e) / (1 + e) * g


OPS = {
    "exponent_rate": (lambda r: [r.uniform(0.001, 0.999)], lambda e: rate(e)),
    "tail_success_prob": (
        lambda r: [r.randint(1, 5000), r.uniform(0.01, 0.99)],
        lambda n, e: max(mpf(0), 1 - 2 * exp(-(n / mpf(2)) * rate(e))),
    ),
    "chi2_lower": (
        lambda r: [r.randint(1, 3000), r.uniform(0.01, 0.99)],
        lambda n, e: exp(-n * e * e / 4),
    ),
    "chi2_upper": (
        lambda r: [r.randint(1, 3000), r.uniform(0.01, 0.99)],
        lambda n, e: exp(-(n / mpf(2)) * rate(e)),
    ),
    "interval_failure": (
        lambda r: [r.randint(1, 3000), r.uniform(0.01, 0.99)],
        lambda n, e: 6 * exp(-(n / mpf(2)) * rate(e)),
    ),
    "interval_lo": (lambda r: [r.uniform(0.01, 1.0), r.uniform(0.001, 0.5)], lo),
    "interval_hi": (lambda r: [r.uniform(0.01, 1.0), r.uniform(0.001, 0.9)], hi),
    "projected_margin_binary": (
        lambda r: [r.uniform(0.01, 1.0), r.uniform(0.001, 0.5)],
        lambda g, e: g - 2 * e / (1 - e),
    ),
    "projected_margin_multiclass": (
        lambda r: [r.uniform(0.01, 1.0), r.uniform(0.001, 0.5)],
        lambda g, e: -(1 + 3 * e) / (1 - e * e) + sqrt(1 - e * e) / (1 + e) + (1 + e) / (1 - e) * g,
    ),
    "projected_margin_oneparam": (
        lambda r: [r.uniform(0.01, 1.0), r.uniform(0.001, 0.5), r.randint(2, 20)],
        lambda g, e, l: -2 * e / (1 - e) + (1 + e) * g / (sqrt(2 * l) * (1 - e)),
    ),
    "balcan_min_dim": (
        lambda r: [r.uniform(0.01, 1.0), r.uniform(1e-6, 0.99), r.uniform(1e-6, 0.99), r.uniform(0.1, 10.0)],
        lambda g, rho, d, c: c / (g * g) * log(1 / (rho * d)),
    ),
    "min_dim_binary": (
        lambda r: [r.uniform(0.01, 0.99), r.uniform(1e-6, 0.99), r.randint(1, 100000)],
        lambda e, d, m: min_dim(e, d, 6 * m),
    ),
    "min_dim_multiclass": (
        lambda r: [r.uniform(0.01, 0.99), r.uniform(1e-6, 0.99), r.randint(1, 100000), r.randint(1, 50)],
        lambda e, d, m, l: min_dim(e, d, 6 * l * m),
    ),
    "min_dim_oneparam": (
        lambda r: [r.uniform(0.01, 0.99), r.uniform(1e-6, 0.99), r.randint(1, 100000), r.randint(2, 50)],
        lambda e, d, m, l: min_dim(e, d, 6 * m * (l - 1)),
    ),
}


def main():
    rng = random.Random(20240601)
    out = {}
    for name, (draw, f) in OPS.items():
        rows = []
        while len(rows) < POINTS:
            args = draw(rng)
            v = f(*[a if isinstance(a, int) else mpf(a) for a in args])
            if isinstance(v, int):
                rows.append({"args": args, "value": v})
            elif abs(v) >= MIN_ABS or name.startswith(("chi2", "interval_failure", "exponent")) and v > mpf("1e-250"):
                rows.append({"args": args, "value": float(v)})
        out[name] = rows
    path = Path(__file__).resolve().parent.parent / "data" / "bounds_oracle.json"
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
