"""Built-in test-function families for operator diagnostics.

The contraction checks need function classes with known seminorms:
monotone piecewise-linear functions (exact variation, kinks kept away
from 0 so the series tail sees a plain linear piece) and smooth
Lipschitz functions with analytic derivatives (exact seminorm up to
dense sampling).  Families are drawn from a seeded generator so suites
are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expansion import ThetaParams

__all__ = ["TestFunction", "constant_family", "monotone_family", "lipschitz_family"]


@dataclass(frozen=True)
class TestFunction:
    """A test function with whatever seminorms its family knows exactly."""

    label: str
    fn: object
    variation: float | None = None
    seminorm: float | None = None

    def __call__(self, x):
        return self.fn(x)


def constant_family(values=(1.0, -2.5, 0.0, 7.25)) -> list[TestFunction]:
    out = []
    for c in values:
        out.append(
            TestFunction(
                label=f"const[{c}]",
                fn=(lambda x, c=c: np.full_like(np.asarray(x, dtype=float), c)),
                variation=0.0,
                seminorm=0.0,
            )
        )
    return out


def monotone_family(params: ThetaParams, rng: np.random.Generator, count: int = 50) -> list[TestFunction]:
    """Random non-decreasing piecewise-linear functions on [0, theta].

    Kink abscissae stay above theta/16 so the leading stretch is exactly
    linear; variations are |f(theta) - f(0)| by monotonicity.
    """
    th = params.theta
    out = []
    for idx in range(count):
        k = int(rng.integers(1, 6))
        knots = np.sort(rng.uniform(th / 16.0, th, size=k))
        xs = np.concatenate(([0.0], knots, [th]))
        incs = rng.uniform(0.0, 1.0, size=xs.size)
        ys = np.cumsum(incs)
        ys = (ys - ys[0]) / max(ys[-1] - ys[0], 1e-9)
        scale = float(rng.uniform(0.2, 3.0))
        shift = float(rng.uniform(-1.0, 1.0))
        ys = shift + scale * ys

        def fn(x, xs=xs, ys=ys):
            return np.interp(np.asarray(x, dtype=float), xs, ys)

        out.append(TestFunction(label=f"monotone[{idx}]", fn=fn, variation=float(ys[-1] - ys[0])))
    return out


def lipschitz_family(params: ThetaParams, rng: np.random.Generator, count: int = 50) -> list[TestFunction]:
    """Random smooth functions with analytically known max|f'|."""
    th = params.theta
    dense = np.linspace(0.0, th, 4097)
    out = []
    for idx in range(count):
        kind = idx % 3
        if kind == 0:
            a = float(rng.uniform(0.2, 2.0))
            w = float(rng.uniform(1.0, 12.0 / th))
            phi = float(rng.uniform(0.0, 2.0 * math.pi))
            fn = lambda x, a=a, w=w, phi=phi: a * np.sin(w * np.asarray(x, dtype=float) + phi)
            dfn = lambda x, a=a, w=w, phi=phi: a * w * np.cos(w * np.asarray(x, dtype=float) + phi)
            label = f"sin[{idx}]"
        elif kind == 1:
            c = rng.uniform(-2.0, 2.0, size=4)
            fn = lambda x, c=c: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), c)
            dc = np.polynomial.polynomial.polyder(c)
            dfn = lambda x, dc=dc: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), dc)
            label = f"poly[{idx}]"
        else:
            a = float(rng.uniform(0.5, 4.0))
            b = float(rng.uniform(0.5, 3.0))
            fn = lambda x, a=a, b=b: a / (1.0 + b * np.asarray(x, dtype=float))
            dfn = lambda x, a=a, b=b: -a * b / (1.0 + b * np.asarray(x, dtype=float)) ** 2
            label = f"rat[{idx}]"
        s = float(np.max(np.abs(dfn(dense))))
        out.append(TestFunction(label=label, fn=fn, seminorm=s))
    return out
