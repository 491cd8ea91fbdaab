"""Canonical parameterizations of the supported distribution families.

Every tail quantity in this package is about the centered variable
X = Y - E[Y].  The raw variable Y only appears in samplers and in the CLI,
which subtracts ``mean_shift`` before calling anything else.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError, UnsupportedFamilyError
from .specfun import RealInterval


class Side(str, enum.Enum):
    """Which tail of the centered variable: Upper is P(X >= x), Lower is P(X <= -x)."""

    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative weights with cached l2 squared and sup norms."""

    u: tuple[float, ...]
    l2_sq: float = field(init=False, repr=False)
    linf: float = field(init=False, repr=False)

    def __post_init__(self):
        u = tuple(float(v) for v in self.u)
        if not u:
            raise DomainError("weight vector must be nonempty")
        if any(v < 0.0 or math.isnan(v) for v in u):
            raise DomainError("weights must be nonnegative")
        linf = max(u)
        if linf <= 0.0:
            raise DomainError("weights must not all be zero")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "l2_sq", math.fsum(v * v for v in u))
        object.__setattr__(self, "linf", linf)

    def __len__(self):
        return len(self.u)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.u, dtype=float)


@dataclass(frozen=True)
class Gamma:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"gamma shape must be positive, got {self.alpha}")


@dataclass(frozen=True)
class ChiSq:
    k: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise DomainError(f"chi-square degrees of freedom must be an integer >= 1, got {self.k}")


@dataclass(frozen=True)
class WeightedChiSq:
    u: WeightVector

    def __post_init__(self):
        if not isinstance(self.u, WeightVector):
            object.__setattr__(self, "u", WeightVector(tuple(self.u)))


@dataclass(frozen=True)
class NoncentralChiSq:
    k: int
    lam: float

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise DomainError(f"noncentral chi-square needs integer k >= 1, got {self.k}")
        if self.lam < 0.0:
            raise DomainError(f"noncentrality must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise DomainError(f"beta parameters must be positive, got ({self.alpha}, {self.beta})")


@dataclass(frozen=True)
class Binomial:
    k: int
    p: float

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise DomainError(f"binomial count must be an integer >= 1, got {self.k}")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"binomial success probability must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class Poisson:
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise DomainError(f"poisson intensity must be positive, got {self.lam}")


@dataclass(frozen=True)
class IrwinHall:
    k: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise DomainError(f"irwin-hall count must be an integer >= 1, got {self.k}")


@dataclass(frozen=True)
class RademacherSum:
    k: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise DomainError(f"rademacher count must be an integer >= 1, got {self.k}")


@dataclass(frozen=True)
class Normal:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0.0:
            raise DomainError(f"normal variance must be positive, got {self.sigma2}")


DistSpec = Union[
    Gamma, ChiSq, WeightedChiSq, NoncentralChiSq, Beta,
    Binomial, Poisson, IrwinHall, RademacherSum, Normal,
]

_FAMILY_NAMES = {
    Gamma: "gamma",
    ChiSq: "chisq",
    WeightedChiSq: "weighted_chisq",
    NoncentralChiSq: "noncentral_chisq",
    Beta: "beta",
    Binomial: "binomial",
    Poisson: "poisson",
    IrwinHall: "irwin_hall",
    RademacherSum: "rademacher",
    Normal: "normal",
}
_NAME_TO_FAMILY = {v: k for k, v in _FAMILY_NAMES.items()}


def family_name(spec: DistSpec) -> str:
    return _FAMILY_NAMES[type(spec)]


def spec_to_json(spec: DistSpec) -> dict:
    """Serialize to the wire schema {"family": ..., "params": {...}}."""
    if isinstance(spec, Gamma):
        params = {"alpha": spec.alpha}
    elif isinstance(spec, ChiSq):
        params = {"k": spec.k}
    elif isinstance(spec, WeightedChiSq):
        params = {"weights": list(spec.u.u)}
    elif isinstance(spec, NoncentralChiSq):
        params = {"k": spec.k, "lambda": spec.lam}
    elif isinstance(spec, Beta):
        params = {"alpha": spec.alpha, "beta": spec.beta}
    elif isinstance(spec, Binomial):
        params = {"k": spec.k, "p": spec.p}
    elif isinstance(spec, Poisson):
        params = {"lambda": spec.lam}
    elif isinstance(spec, IrwinHall):
        params = {"k": spec.k}
    elif isinstance(spec, RademacherSum):
        params = {"k": spec.k}
    elif isinstance(spec, Normal):
        params = {"sigma2": spec.sigma2}
    else:
        raise UnsupportedFamilyError(f"unknown spec {spec!r}")
    return {"family": family_name(spec), "params": params}


def spec_from_json(obj: dict) -> DistSpec:
    """Parse the wire schema produced by ``spec_to_json``."""
    try:
        name = obj["family"]
        params = dict(obj.get("params", {}))
    except (TypeError, KeyError) as exc:
        raise DomainError(f"malformed distribution spec: {obj!r}") from exc
    cls = _NAME_TO_FAMILY.get(name)
    if cls is None:
        raise UnsupportedFamilyError(f"unknown family {name!r}")
    try:
        if cls is Gamma:
            return Gamma(float(params["alpha"]))
        if cls is ChiSq:
            return ChiSq(int(params["k"]))
        if cls is WeightedChiSq:
            return WeightedChiSq(WeightVector(tuple(float(v) for v in params["weights"])))
        if cls is NoncentralChiSq:
            return NoncentralChiSq(int(params["k"]), float(params["lambda"]))
        if cls is Beta:
            return Beta(float(params["alpha"]), float(params["beta"]))
        if cls is Binomial:
            return Binomial(int(params["k"]), float(params["p"]))
        if cls is Poisson:
            return Poisson(float(params["lambda"]))
        if cls is IrwinHall:
            return IrwinHall(int(params["k"]))
        if cls is RademacherSum:
            return RademacherSum(int(params["k"]))
        return Normal(float(params["sigma2"]))
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc} for family {name!r}") from exc


def mean_shift(spec: DistSpec) -> float:
    """E[Y] for the raw variable, so raw thresholds map to centered x."""
    if isinstance(spec, Gamma):
        return spec.alpha
    if isinstance(spec, ChiSq):
        return float(spec.k)
    if isinstance(spec, WeightedChiSq):
        return math.fsum(spec.u.u)
    if isinstance(spec, NoncentralChiSq):
        return spec.k + spec.lam
    if isinstance(spec, Beta):
        return spec.alpha / (spec.alpha + spec.beta)
    if isinstance(spec, Binomial):
        return spec.k * spec.p
    if isinstance(spec, Poisson):
        return spec.lam
    if isinstance(spec, IrwinHall):
        return spec.k / 2.0
    if isinstance(spec, RademacherSum):
        return 0.0
    if isinstance(spec, Normal):
        return 0.0
    raise UnsupportedFamilyError(f"unknown spec {spec!r}")


def variance(spec: DistSpec) -> float:
    """Var(Y) = Var(X)."""
    if isinstance(spec, Gamma):
        return spec.alpha
    if isinstance(spec, ChiSq):
        return 2.0 * spec.k
    if isinstance(spec, WeightedChiSq):
        return 2.0 * spec.u.l2_sq
    if isinstance(spec, NoncentralChiSq):
        return 2.0 * spec.k + 4.0 * spec.lam
    if isinstance(spec, Beta):
        a, b = spec.alpha, spec.beta
        return a * b / ((a + b) ** 2 * (a + b + 1.0))
    if isinstance(spec, Binomial):
        return spec.k * spec.p * (1.0 - spec.p)
    if isinstance(spec, Poisson):
        return spec.lam
    if isinstance(spec, IrwinHall):
        return spec.k / 12.0
    if isinstance(spec, RademacherSum):
        return float(spec.k)
    if isinstance(spec, Normal):
        return spec.sigma2
    raise UnsupportedFamilyError(f"unknown spec {spec!r}")


def support_extent(spec: DistSpec, side: Side) -> float:
    """Largest x with P(X >= x) > 0 (upper) or P(X <= -x) > 0 (lower); inf if unbounded."""
    mu = mean_shift(spec)
    if isinstance(spec, Beta):
        return 1.0 - mu if side is Side.UPPER else mu
    if isinstance(spec, Binomial):
        return spec.k - mu if side is Side.UPPER else mu
    if isinstance(spec, IrwinHall):
        return spec.k / 2.0
    if isinstance(spec, RademacherSum):
        return float(spec.k)
    if side is Side.LOWER and isinstance(spec, (Gamma, ChiSq, WeightedChiSq, NoncentralChiSq, Poisson)):
        return mu
    return math.inf


@dataclass(frozen=True)
class LogMgfSpec:
    """log E exp(tX) of the centered variable, with its domain."""

    eval: Callable[[object], object]
    domain: RealInterval


def _irwin_hall_log_mgf(k: int):
    def ev(t):
        t = np.asarray(t, dtype=float)
        u = 0.5 * t
        small = np.abs(u) < 1e-3
        u_safe = np.where(small, 1.0, u)
        with np.errstate(over="ignore"):
            direct = np.log(np.sinh(np.abs(u_safe)) / np.abs(u_safe))
        u2 = u * u
        series = u2 / 6.0 - u2 * u2 / 180.0
        out = k * np.where(small, series, direct)
        return out if out.ndim else float(out)

    return ev


def log_mgf(spec: DistSpec) -> LogMgfSpec:
    """Closed-form centered log-MGF; Beta has none and raises."""
    if isinstance(spec, Normal):
        s2 = spec.sigma2

        def ev_normal(t):
            t = np.asarray(t, dtype=float)
            out = 0.5 * s2 * t * t
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_normal, RealInterval(-math.inf, math.inf, False, False))

    if isinstance(spec, Gamma):
        a = spec.alpha

        def ev_gamma(t):
            t = np.asarray(t, dtype=float)
            tc = np.where(t < 1.0, t, 0.0)
            out = np.where(t < 1.0, -a * (tc + np.log1p(-tc)), np.inf)
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_gamma, RealInterval(-math.inf, 1.0, False, False))

    if isinstance(spec, ChiSq):
        k = spec.k

        def ev_chisq(t):
            t = np.asarray(t, dtype=float)
            tc = np.where(t < 0.5, t, 0.0)
            out = np.where(t < 0.5, -0.5 * k * (np.log1p(-2.0 * tc) + 2.0 * tc), np.inf)
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_chisq, RealInterval(-math.inf, 0.5, False, False))

    if isinstance(spec, WeightedChiSq):
        u = spec.u.as_array()
        hi = 1.0 / (2.0 * spec.u.linf)

        def ev_weighted(t):
            t = np.asarray(t, dtype=float)
            tu = np.multiply.outer(t, u)
            with np.errstate(invalid="ignore"):
                terms = -0.5 * (np.log1p(-2.0 * tu) + 2.0 * tu)
            out = np.where(np.all(tu < 0.5, axis=-1), np.nansum(terms, axis=-1), np.inf)
            return out if np.ndim(out) else float(out)

        return LogMgfSpec(ev_weighted, RealInterval(-math.inf, hi, False, False))

    if isinstance(spec, NoncentralChiSq):
        k, lam = spec.k, spec.lam

        def ev_nc(t):
            t = np.asarray(t, dtype=float)
            tc = np.where(t < 0.5, t, 0.0)
            body = 2.0 * lam * tc * tc / (1.0 - 2.0 * tc) - 0.5 * k * (np.log1p(-2.0 * tc) + 2.0 * tc)
            out = np.where(t < 0.5, body, np.inf)
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_nc, RealInterval(-math.inf, 0.5, False, False))

    if isinstance(spec, Binomial):
        k, p = spec.k, spec.p
        logp, logq = math.log(p), math.log1p(-p)

        def ev_binom(t):
            t = np.asarray(t, dtype=float)
            out = k * (np.logaddexp(logq, logp + t) - p * t)
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_binom, RealInterval(-math.inf, math.inf, False, False))

    if isinstance(spec, Poisson):
        lam = spec.lam

        def ev_pois(t):
            t = np.asarray(t, dtype=float)
            out = lam * (np.expm1(t) - t)
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_pois, RealInterval(-math.inf, math.inf, False, False))

    if isinstance(spec, IrwinHall):
        return LogMgfSpec(_irwin_hall_log_mgf(spec.k), RealInterval(-math.inf, math.inf, False, False))

    if isinstance(spec, RademacherSum):
        k = spec.k

        def ev_rad(t):
            t = np.asarray(t, dtype=float)
            a = np.abs(t)
            out = k * (a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0))
            return out if out.ndim else float(out)

        return LogMgfSpec(ev_rad, RealInterval(-math.inf, math.inf, False, False))

    raise UnsupportedFamilyError(f"no closed-form MGF for family {family_name(spec)}")


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based splittable stream: (seed, stream) keys a Philox generator."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


_CHUNK_ELEMS = 1 << 22


def sample(spec: DistSpec, rng_stream: RngStream, n: int) -> np.ndarray:
    """n i.i.d. centered draws, bit-reproducible given (seed, stream).

    Scalar families map directly onto the Philox generator's native samplers
    (gamma via Marsaglia-Tsang with the shape<1 boost, binomial via
    inversion/BTPE, poisson via inversion/transformed rejection).  Sum-shaped
    families draw their summand matrix in fixed-size chunks so memory stays
    bounded without changing the draw order.
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = rng_stream.generator()
    shift = mean_shift(spec)

    if isinstance(spec, Gamma):
        return rng.standard_gamma(spec.alpha, size=n) - shift
    if isinstance(spec, ChiSq):
        return rng.chisquare(spec.k, size=n) - shift
    if isinstance(spec, NoncentralChiSq):
        if spec.lam == 0.0:
            return rng.chisquare(spec.k, size=n) - shift
        return rng.noncentral_chisquare(spec.k, spec.lam, size=n) - shift
    if isinstance(spec, Beta):
        return rng.beta(spec.alpha, spec.beta, size=n) - shift
    if isinstance(spec, Binomial):
        return rng.binomial(spec.k, spec.p, size=n).astype(float) - shift
    if isinstance(spec, Poisson):
        return rng.poisson(spec.lam, size=n).astype(float) - shift
    if isinstance(spec, RademacherSum):
        return 2.0 * rng.binomial(spec.k, 0.5, size=n).astype(float) - spec.k
    if isinstance(spec, Normal):
        return rng.normal(0.0, math.sqrt(spec.sigma2), size=n)

    if isinstance(spec, IrwinHall):
        k = spec.k
        out = np.empty(n, dtype=float)
        rows = max(1, _CHUNK_ELEMS // k)
        pos = 0
        while pos < n:
            m = min(rows, n - pos)
            out[pos:pos + m] = rng.random((m, k)).sum(axis=1)
            pos += m
        return out - shift

    if isinstance(spec, WeightedChiSq):
        u = spec.u.as_array()
        k = len(u)
        out = np.empty(n, dtype=float)
        rows = max(1, _CHUNK_ELEMS // k)
        pos = 0
        while pos < n:
            m = min(rows, n - pos)
            z = rng.standard_normal((m, k))
            out[pos:pos + m] = (z * z) @ u
            pos += m
        return out - shift

    raise UnsupportedFamilyError(f"no sampler for {spec!r}")
