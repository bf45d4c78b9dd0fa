"""Exact and floating-point arithmetic for theta-expansions.

A theta-expansion writes x in (0, theta] as a continued fraction whose
partial numerators are 1 and whose partial denominators are a_n * theta,
with integer digits a_n >= m and theta = 1/sqrt(m) for a non-square
integer m >= 2.  The Gauss-type map

    T(x) = 1/x - theta * floor(1/(x*theta))   (T(0) = 0)

shifts the digit sequence; digits are read off by floor(1/(x*theta)).

Two backends coexist.  The float backend is fast and adequate for
sampling/statistics, but digit extraction drifts after roughly
``FLOAT_DIGIT_HORIZON`` iterations (each step multiplies relative error
by about 1/x^2).  The exact backend works in the real quadratic field
Q(theta): every quantity is a + b*theta with big-rational a, b, and
theta^2 reduces to the rational 1/m, so the representation is closed
under +, -, *, and reciprocals.  Identity-grade checks must use the
exact backend.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

__all__ = [
    "DomainError",
    "DigitError",
    "TerminationError",
    "FLOAT_DIGIT_HORIZON",
    "INFINITE_DIGIT",
    "ThetaParams",
    "QThetaNumber",
    "DigitSequence",
    "ConvergentPair",
    "Cylinder",
    "new_params",
    "floor_qtheta",
    "ceil_qtheta",
    "log_qtheta",
    "digit_index",
    "gauss_map_apply",
    "expand",
    "convergents",
    "reconstruct",
    "approximation_error",
    "cylinder",
    "cylinder_measure",
    "qtheta_to_dict",
]


class DomainError(ValueError):
    """Point lies outside [0, theta] beyond tolerance."""


class DigitError(ValueError):
    """Digit below the minimum m, or malformed digit data."""


class TerminationError(ValueError):
    """An exact expansion terminated before the requested index."""


#: Number of float-backend map iterations before digit extraction is
#: considered unreliable.  Orbits beyond this remain distributionally
#: faithful (useful for statistics) but individual digits drift.
FLOAT_DIGIT_HORIZON = 40

#: Sentinel returned by digit_index at x = 0.
INFINITE_DIGIT = math.inf

#: Absolute slack when validating float points against [0, theta].
_FLOAT_SLACK = 1e-12

Rational = Union[int, Fraction]


def _is_perfect_square(n: int) -> bool:
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


@dataclass(frozen=True)
class ThetaParams:
    """The integer m >= 2 (non-square) and theta = 1/sqrt(m)."""

    m: int
    theta: float

    @property
    def theta_exact(self) -> "QThetaNumber":
        """theta as the exact field element 0 + 1*theta."""
        return QThetaNumber(Fraction(0), Fraction(1), self.m)

    @property
    def log_normalizer(self) -> float:
        """log(1 + theta^2) = log(1 + 1/m)."""
        return math.log1p(1.0 / self.m)


def new_params(m: int) -> ThetaParams:
    """Validate m and build ThetaParams with theta = 1/sqrt(m).

    Rejects m < 2 and perfect squares (theta would be rational, which
    breaks the standing irrationality hypothesis).
    """
    if not isinstance(m, int) or isinstance(m, bool):
        raise DigitError(f"m must be an integer, got {m!r}")
    if m < 2:
        raise DigitError(f"m must be >= 2, got {m}")
    if _is_perfect_square(m):
        raise DigitError(f"m must not be a perfect square, got {m}")
    return ThetaParams(m=m, theta=1.0 / math.sqrt(m))


@lru_cache(maxsize=None)
def _theta_enclosure(m: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure lo <= theta <= hi with width about 2^-bits."""
    s = isqrt(m << (2 * bits))
    # s <= sqrt(m)*2^bits < s+1  =>  2^bits/(s+1) < theta <= 2^bits/s
    return Fraction(1 << bits, s + 1), Fraction(1 << bits, s)


@dataclass(frozen=True)
class QThetaNumber:
    """Exact element a + b*theta of Q(theta), theta = 1/sqrt(m).

    Coefficients are reduced Fractions, so equality of values is
    equality of (a, b, m) triples: theta is irrational, hence the
    representation over the basis {1, theta} is unique.
    """

    a: Fraction
    b: Fraction
    m: int

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    # -- constructors -------------------------------------------------

    @classmethod
    def theta(cls, m: int) -> "QThetaNumber":
        return cls(Fraction(0), Fraction(1), m)

    @classmethod
    def from_rational(cls, value: Rational, m: int) -> "QThetaNumber":
        return cls(Fraction(value), Fraction(0), m)

    # -- ring/field operations ----------------------------------------

    def _coerce(self, other) -> "QThetaNumber":
        if isinstance(other, QThetaNumber):
            if other.m != self.m:
                raise ValueError(f"mixed fields: m={self.m} vs m={other.m}")
            return other
        if isinstance(other, (int, Fraction)):
            return QThetaNumber(Fraction(other), Fraction(0), self.m)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QThetaNumber(self.a + o.a, self.b + o.b, self.m)

    __radd__ = __add__

    def __neg__(self):
        return QThetaNumber(-self.a, -self.b, self.m)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QThetaNumber(self.a - o.a, self.b - o.b, self.m)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # (a1 + b1 t)(a2 + b2 t) with t^2 = 1/m
        a = self.a * o.a + Fraction(self.b * o.b, self.m)
        b = self.a * o.b + self.b * o.a
        return QThetaNumber(a, b, self.m)

    __rmul__ = __mul__

    def reciprocal(self) -> "QThetaNumber":
        """1/(a + b*theta) = (a - b*theta) / (a^2 - b^2/m)."""
        d = self.a * self.a - Fraction(self.b * self.b, self.m)
        if d == 0:
            # a^2 = b^2/m forces a = b = 0 since theta is irrational
            raise ZeroDivisionError("reciprocal of zero element of Q(theta)")
        return QThetaNumber(self.a / d, -self.b / d, self.m)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.reciprocal()

    # -- order and conversions ----------------------------------------

    def sign(self) -> int:
        """Exact sign of the real value a + b*theta (no floating point)."""
        a, b = self.a, self.b
        if b == 0:
            return -1 if a < 0 else (1 if a > 0 else 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # Opposite signs: |a| vs |b|*theta  <=>  m*a^2 vs b^2.
        lhs = self.m * a.numerator ** 2 * b.denominator ** 2
        rhs = b.numerator ** 2 * a.denominator ** 2
        if lhs == rhs:  # impossible for nonzero rationals, theta irrational
            raise ArithmeticError("degenerate sign comparison in Q(theta)")
        if a > 0:
            return 1 if lhs > rhs else -1
        return -1 if lhs > rhs else 1

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self) -> float:
        if self.b == 0:
            return float(self.a)
        bits = 64
        lo = hi = None
        while bits <= (1 << 20):
            lo_t, hi_t = _theta_enclosure(self.m, bits)
            if self.b > 0:
                lo, hi = self.a + self.b * lo_t, self.a + self.b * hi_t
            else:
                lo, hi = self.a + self.b * hi_t, self.a + self.b * lo_t
            flo, fhi = float(lo), float(hi)
            if flo == fhi:
                return flo
            bits *= 2
        return float((lo + hi) / 2)

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*theta"


def floor_qtheta(x: QThetaNumber) -> int:
    """Largest integer <= a + b*theta, via integer arithmetic only.

    Uses an isqrt-based rational enclosure of theta, refined until the
    floor is determined, then verifies n <= x < n+1 with exact sign
    comparisons.  Never rounds through floats, so digits stay correct
    arbitrarily close to cylinder boundaries.
    """
    if x.b == 0:
        return math.floor(x.a)
    bits = 64
    n = None
    while True:
        lo_t, hi_t = _theta_enclosure(x.m, bits)
        if x.b > 0:
            lo, hi = x.a + x.b * lo_t, x.a + x.b * hi_t
        else:
            lo, hi = x.a + x.b * hi_t, x.a + x.b * lo_t
        flo, fhi = math.floor(lo), math.floor(hi)
        if flo == fhi:
            n = flo
            break
        bits *= 2  # terminates: x is irrational when b != 0
    while (x - n).sign() < 0:
        n -= 1
    while (x - (n + 1)).sign() >= 0:
        n += 1
    return n


def ceil_qtheta(x: QThetaNumber) -> int:
    return -floor_qtheta(-x)


def _log_fraction(f: Fraction) -> float:
    # math.log accepts arbitrarily large ints, so this never overflows.
    return math.log(f.numerator) - math.log(f.denominator)


def log_qtheta(x: QThetaNumber) -> float:
    """Natural log of a positive a + b*theta, safe for huge coefficients.

    Coefficient pairs of orbit quantities grow exponentially while the
    real value stays moderate; converting to float first would overflow
    or cancel.  Instead theta is enclosed by rationals tight enough that
    the value is known to 20 digits, and the log is taken on big
    integers.
    """
    if x.sign() <= 0:
        raise ValueError("log_qtheta requires a positive value")
    a, b, m = x.a, x.b, x.m
    if b == 0:
        return _log_fraction(a)
    if a == 0:
        return _log_fraction(b) - 0.5 * math.log(m)
    bits = 128
    while True:
        lo_t, hi_t = _theta_enclosure(m, bits)
        if b > 0:
            lo, hi = a + b * lo_t, a + b * hi_t
        else:
            lo, hi = a + b * hi_t, a + b * lo_t
        if lo > 0 and (hi - lo) * 10**20 <= lo:
            return _log_fraction((lo + hi) / 2)
        bits *= 2
        if bits > (1 << 24):  # pragma: no cover
            raise ArithmeticError("theta enclosure failed to converge")


# ---------------------------------------------------------------------------
# digit sequences, convergents, cylinders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DigitSequence:
    """A finite run of expansion digits plus a termination flag.

    ``terminated`` is set when the orbit hit 0 exactly, so the expansion
    is finite (only detectable in the exact backend).
    """

    digits: tuple[int, ...]
    terminated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if d < 1:
                raise DigitError(f"digit must be a positive integer, got {d}")

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)


@dataclass(frozen=True)
class ConvergentPair:
    """Exact convergent (p_n, q_n) at index n."""

    p: QThetaNumber
    q: QThetaNumber
    n: int


@dataclass(frozen=True)
class Cylinder:
    """Fundamental interval of all points sharing a digit prefix.

    Endpoints are exact.  Cylinders of fixed rank tile (0, theta] in
    half-open fashion: the shared endpoint between neighbours belongs to
    exactly one of them, and x = theta carries digit m.
    """

    digits: DigitSequence
    lower: QThetaNumber
    upper: QThetaNumber


def _digit_tuple(digits, params: ThetaParams) -> tuple[int, ...]:
    seq = tuple(digits.digits) if isinstance(digits, DigitSequence) else tuple(int(d) for d in digits)
    if not seq:
        raise DigitError("empty digit sequence")
    for d in seq:
        if d < params.m:
            raise DigitError(f"digit {d} below minimum m={params.m}")
    return seq


# ---------------------------------------------------------------------------
# the expansion map
# ---------------------------------------------------------------------------


def _validate_float_point(x: float, params: ThetaParams) -> float:
    if not (-_FLOAT_SLACK <= x <= params.theta + _FLOAT_SLACK):
        raise DomainError(f"x={x!r} outside [0, {params.theta}]")
    return min(max(x, 0.0), params.theta)


def _validate_exact_point(x: QThetaNumber, params: ThetaParams) -> QThetaNumber:
    if x.m != params.m:
        raise ValueError(f"point from field m={x.m}, params have m={params.m}")
    if x.sign() < 0 or (params.theta_exact - x).sign() < 0:
        raise DomainError(f"exact point {x} outside [0, theta]")
    return x


def _resolve_backend(x, backend: str) -> tuple[object, str]:
    if backend not in ("auto", "exact", "float"):
        raise ValueError(f"unknown backend {backend!r}")
    if isinstance(x, QThetaNumber):
        if backend == "float":
            return float(x), "float"
        return x, "exact"
    if isinstance(x, (int, Fraction)) and backend != "float":
        return x, "exact"
    if backend == "exact":
        raise TypeError(f"exact backend needs QThetaNumber/Fraction input, got {type(x).__name__}")
    return float(x), "float"


def digit_index(x, params: ThetaParams, backend: str = "auto"):
    """floor(1/(x*theta)) for x in (0, theta]; INFINITE_DIGIT at x = 0.

    Always >= m on the domain.  The float path clamps to m near the
    right endpoint, where theta^2*m = 1 only holds to rounding.
    """
    x, kind = _resolve_backend(x, backend)
    if kind == "exact":
        x = _as_qtheta(x, params)
        _validate_exact_point(x, params)
        if x.is_zero:
            return INFINITE_DIGIT
        return floor_qtheta((x * params.theta_exact).reciprocal())
    x = _validate_float_point(x, params)
    if x == 0.0:
        return INFINITE_DIGIT
    r = 1.0 / (x * params.theta)
    if not math.isfinite(r):
        raise DomainError(f"x={x!r} too small for the float backend")
    return max(params.m, math.floor(r))


def gauss_map_apply(x, params: ThetaParams, backend: str = "auto"):
    """One step of the expansion map T(x) = 1/x - theta*floor(1/(x*theta))."""
    x, kind = _resolve_backend(x, backend)
    if kind == "exact":
        x = _as_qtheta(x, params)
        _validate_exact_point(x, params)
        if x.is_zero:
            return QThetaNumber.from_rational(0, params.m)
        d = floor_qtheta((x * params.theta_exact).reciprocal())
        r = x.reciprocal()
        return QThetaNumber(r.a, r.b - d, params.m)
    x = _validate_float_point(x, params)
    if x == 0.0:
        return 0.0
    r = 1.0 / (x * params.theta)
    if not math.isfinite(r):
        raise DomainError(f"x={x!r} too small for the float backend")
    d = max(params.m, math.floor(r))
    # 1/x - theta*d = theta*(r - d); stays inside [0, theta) by construction
    return min(max(params.theta * (r - d), 0.0), params.theta)


def _as_qtheta(x, params: ThetaParams) -> QThetaNumber:
    if isinstance(x, QThetaNumber):
        return x
    return QThetaNumber.from_rational(x, params.m)


def expand(x, n_max: int, params: ThetaParams, backend: str = "auto") -> DigitSequence:
    """First min(n_max, termination) digits of the theta-expansion of x.

    The boundary x = theta is admitted: it has the one-digit expansion
    [m] (T(theta) = 0 exactly).  In the float backend a warning is
    issued when n_max exceeds FLOAT_DIGIT_HORIZON.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    x, kind = _resolve_backend(x, backend)
    if kind == "exact":
        x = _as_qtheta(x, params)
        _validate_exact_point(x, params)
        if x.is_zero:
            raise DomainError("cannot expand x = 0")
        digits = []
        terminated = False
        for _ in range(n_max):
            digits.append(digit_index(x, params))
            x = gauss_map_apply(x, params)
            if x.is_zero:
                terminated = True
                break
        return DigitSequence(tuple(digits), terminated)
    x = _validate_float_point(x, params)
    if x == 0.0:
        raise DomainError("cannot expand x = 0")
    if n_max > FLOAT_DIGIT_HORIZON:
        warnings.warn(
            f"float backend digits are unreliable beyond {FLOAT_DIGIT_HORIZON} "
            "iterations; use the exact backend for identity checks",
            RuntimeWarning,
            stacklevel=2,
        )
    digits = []
    terminated = False
    th = params.theta
    for _ in range(n_max):
        r = 1.0 / (x * th)
        if not math.isfinite(r):
            raise DomainError("float orbit underflowed")
        d = max(params.m, math.floor(r))
        digits.append(d)
        x = th * (r - d)
        if x <= 0.0:
            terminated = True
            break
    return DigitSequence(tuple(digits), terminated)


# ---------------------------------------------------------------------------
# convergents and identities
# ---------------------------------------------------------------------------


def convergents(digits, params: ThetaParams) -> list[ConvergentPair]:
    """Exact convergents from p_n = a_n*theta*p_{n-1} + p_{n-2} (same for q).

    Seeds p_-1 = 1, p_0 = 0, q_-1 = 0, q_0 = 1.  The 2x2 recurrence
    matrix has determinant -1, so p_n q_{n-1} - p_{n-1} q_n = (-1)^{n+1}.
    """
    seq = _digit_tuple(digits, params)
    m = params.m
    one = QThetaNumber.from_rational(1, m)
    zero = QThetaNumber.from_rational(0, m)
    p_prev, p_cur = one, zero  # p_{-1}, p_0
    q_prev, q_cur = zero, one  # q_{-1}, q_0
    out = []
    for n, a in enumerate(seq, start=1):
        at = QThetaNumber(Fraction(0), Fraction(a), m)
        p_prev, p_cur = p_cur, at * p_cur + p_prev
        q_prev, q_cur = q_cur, at * q_cur + q_prev
        out.append(ConvergentPair(p=p_cur, q=q_cur, n=n))
    return out


def reconstruct(digits, params: ThetaParams, tail=None):
    """Evaluate the finite fraction (p_n + t*p_{n-1})/(q_n + t*q_{n-1}).

    ``tail`` is the value t in [0, theta] continuing the expansion
    (default 0).  Exact tails give an exact result; a float tail gives a
    float.  With t = T^n(x) this reproduces x exactly.
    """
    seq = _digit_tuple(digits, params)
    cs = convergents(seq, params)
    p_n, q_n = cs[-1].p, cs[-1].q
    if len(cs) >= 2:
        p_nm1, q_nm1 = cs[-2].p, cs[-2].q
    else:
        p_nm1 = QThetaNumber.from_rational(0, params.m)
        q_nm1 = QThetaNumber.from_rational(1, params.m)
    if tail is None:
        tail = 0
    if isinstance(tail, float):
        t = tail
        if not (-_FLOAT_SLACK <= t <= params.theta + _FLOAT_SLACK):
            raise DomainError(f"tail {t!r} outside [0, theta]")
        return (float(p_n) + t * float(p_nm1)) / (float(q_n) + t * float(q_nm1))
    t = _as_qtheta(tail, params)
    _validate_exact_point(t, params)
    return (p_n + t * p_nm1) / (q_n + t * q_nm1)


def approximation_error(x: QThetaNumber, n: int, params: ThetaParams) -> QThetaNumber:
    """Signed error x - p_n/q_n, verified against its closed form.

    The closed form is (-1)^n T^n(x) / (q_n (q_n + T^n(x) q_{n-1})):
    x always sits below p_1/q_1 = 1/(a_1*theta), and the sign alternates
    from there.  Raises TerminationError when the expansion has fewer
    than n digits.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x = _as_qtheta(x, params)
    _validate_exact_point(x, params)
    seq = expand(x, n, params, backend="exact")
    if len(seq) < n:
        raise TerminationError(f"expansion terminated after {len(seq)} < {n} digits")
    cs = convergents(seq, params)
    p_n, q_n = cs[-1].p, cs[-1].q
    if n >= 2:
        q_nm1 = cs[-2].q
    else:
        q_nm1 = QThetaNumber.from_rational(1, params.m)
    t = x
    for _ in range(n):
        t = gauss_map_apply(t, params)
    err = x - p_n / q_n
    rhs = t / (q_n * (q_n + t * q_nm1))
    if n % 2 == 1:
        rhs = -rhs
    if err != rhs:
        raise ArithmeticError("two-sided error identity failed in exact arithmetic")
    return err


def cylinder(digits, params: ThetaParams) -> Cylinder:
    """Fundamental interval of the given digit prefix, exact endpoints.

    Endpoints are the fraction values at tail 0 and tail theta; their
    order flips with the parity of the prefix length.
    """
    seq = _digit_tuple(digits, params)
    e0 = reconstruct(seq, params, tail=0)
    e1 = reconstruct(seq, params, tail=params.theta_exact)
    lower, upper = (e0, e1) if e0 < e1 else (e1, e0)
    ds = digits if isinstance(digits, DigitSequence) else DigitSequence(seq)
    return Cylinder(digits=ds, lower=lower, upper=upper)


def cylinder_measure(cyl, params: ThetaParams) -> Fraction:
    """Normalized Lebesgue measure (upper - lower)/theta of a cylinder.

    Always lands in Q: equals 1/(q_n (q_n + theta q_{n-1})), whose
    theta-parts cancel.  Accepts a Cylinder or a digit prefix.
    """
    if not isinstance(cyl, Cylinder):
        cyl = cylinder(cyl, params)
    diff = cyl.upper - cyl.lower
    # division by theta: 1/theta = m*theta
    val = diff * QThetaNumber(Fraction(0), Fraction(params.m), params.m)
    if val.b != 0:
        raise ArithmeticError("cylinder measure should be rational")
    return val.a


# ---------------------------------------------------------------------------
# serialization helpers (used by the CLI JSON reports)
# ---------------------------------------------------------------------------


def qtheta_to_dict(x: QThetaNumber) -> dict:
    """Coefficient-pair form {'a': 'p/q', 'b': 'p/q', 'float': value}."""
    return {"a": str(x.a), "b": str(x.b), "float": float(x)}
