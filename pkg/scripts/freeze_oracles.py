"""Compute reference values by independent means and freeze them to
tests/data/oracles.json.

Nothing here imports koblab: derivatives come from mpmath numerical
differentiation, distances from brute-force meshes, metrics from mpmath
evaluations of the closed forms.

    python3 scripts/freeze_oracles.py
"""

import json
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 40
OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "oracles.json"


def wirtinger_fd(f, z):
    """d f / d z_j = (d/dx_j - i d/dy_j) / 2 by mpmath differentiation."""
    out = []
    for j in range(len(z)):
        def along(t, imag):
            w = list(z)
            w[j] = w[j] + (1j * t if imag else t)
            return f(w)
        dx = mp.diff(lambda t: along(t, False), 0)
        dy = mp.diff(lambda t: along(t, True), 0)
        g = (dx - 1j * dy) / 2
        out.append([float(mp.re(g)), float(mp.im(g))])
    return out


def levi_fd(f, z):
    """d^2 f / dz_j dzbar_k = (f_xx + f_yy + i(f_xy - f_yx)) / 4 style mixed partials."""
    n = len(z)

    def g(*xs):
        w = [z[j] + xs[2 * j] + 1j * xs[2 * j + 1] for j in range(n)]
        return f(w)

    M = []
    for j in range(n):
        row = []
        for k in range(n):
            def part(a, b):
                orders = [0] * (2 * n)
                orders[a] += 1
                orders[b] += 1
                return mp.diff(g, [0] * (2 * n), orders)
            xj, yj, xk, yk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
            val = (part(xj, xk) + part(yj, yk) + 1j * (part(xj, yk) - part(yj, xk))) / 4
            row.append([float(mp.re(val)), float(mp.im(val))])
        M.append(row)
    return M


def saddle_distance_mesh(delta):
    """min |w - (0, -delta)| over {Re w_2 = |w_1|^2}: w_1 = rho e^{i theta},
    w_2 = rho^2 + i t, so the squared distance is rho^2 + (rho^2 + delta)^2 + t^2."""
    rho = np.concatenate([np.linspace(0, 1e-3, 20001), np.linspace(1e-3, 1.0, 20001)])
    d2 = rho ** 2 + (rho ** 2 + delta) ** 2
    return float(np.sqrt(d2.min()))


def slit_bound(z, X, eps0=1.0):
    """|f'(z)| |X| / (2 Re f(z)) with f(w) = (w / (w + eps0))^(1/2), principal branch."""
    f = lambda w: mp.sqrt(w / (w + eps0))
    fz = f(mp.mpc(z))
    fp = mp.diff(f, mp.mpc(z))
    return float(mp.re(fz)), float(abs(fp) * abs(X) / (2 * mp.re(fz)))


def ball_radial(r):
    return float(1 / (1 - mp.mpf(r) ** 2))


def ball_metric(z, X):
    z = [mp.mpc(*c) for c in z]
    X = [mp.mpc(*c) for c in X]
    nz = sum(abs(c) ** 2 for c in z)
    nX = sum(abs(c) ** 2 for c in X)
    pair = abs(sum(a * mp.conj(b) for a, b in zip(X, z))) ** 2
    return float(mp.sqrt(nX / (1 - nz) + pair / (1 - nz) ** 2))


def noisy_power_law(seed=7, count=8):
    rng = np.random.default_rng(seed)
    deltas = 1e-2 * 10 ** (-0.5 * np.arange(count))
    vals = 3.0 * deltas ** -0.75 * (1 + 0.01 * rng.uniform(-1, 1, count))
    x = [mp.log(mp.mpf(d)) for d in deltas]
    y = [mp.log(mp.mpf(v)) for v in vals]
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    slope = sxy / sxx
    r2 = sxy ** 2 / (sxx * syy)
    return {"deltas": deltas.tolist(), "values": vals.tolist(), "slope": float(slope),
            "intercept": float(my - slope * mx), "r2": float(r2)}


def main():
    saddle = lambda w: mp.re(w[1]) - abs(w[0]) ** 2
    oracles = {
        "wirtinger_saddle_1pi": {"z": [[1, 1], [0, 0]], "grad": wirtinger_fd(saddle, [1 + 1j, 0])},
        "levi_saddle_origin": {"z": [[0, 0], [0, 0]], "matrix": levi_fd(saddle, [0, 0])},
        "levi_quartic_1": {
            "z": [[0.3, 0.2], [0, 0]],
            "matrix": levi_fd(lambda w: mp.re(w[1]) + abs(w[0]) ** 4, [0.3 + 0.2j, 0]),
        },
        "saddle_distance": {str(d): saddle_distance_mesh(d) for d in (1e-2, 1e-3, 1e-4)},
        "slit_tip": dict(zip(("f", "bound"), slit_bound(0.01, 1.0))),
        "ball_radial": {str(r): ball_radial(r) for r in (0.0, 0.3, 0.9, 0.99)},
        "ball_generic": {"z": [[0.3, 0.0], [0.0, 0.2]], "X": [[1.0, 0.0], [0.0, 1.0]],
                         "value": ball_metric([(0.3, 0), (0, 0.2)], [(1, 0), (0, 1)])},
        "halfplane_projection": {str(d): float(1 / (2 * mp.mpf(d))) for d in (1e-2, 1e-3)},
        "noisy_power_law": noisy_power_law(),
        "localization_edge": {"ell": float(mp.atanh(0.5)), "coth": float(mp.coth(mp.atanh(0.5)))},
        "poincare_half": float(mp.atanh(0.5)),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(oracles, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
