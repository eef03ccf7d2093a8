"""Parameters of the recursive construction.

A :class:`ParamSet` fixes every number the construction needs: the level
count, layer count, set sizes per level, target degrees, the ground-edge
density and the per-level pseudo-edge densities. Three ways to get one:

* :func:`theoretical_preset` follows the asymptotic settings. These are far
  too large to materialise and exist for diagnostics.
* :func:`desk_preset` returns a named, validated small-scale set.
* :func:`build_params` assembles a custom set and fills in the ground
  densities from the gadget tables.

Tuples indexed by level (``sigma``, ``d``, ``N``, ``n_level``,
``rho_level``) are stored 0-based, so level ``l`` lives at ``[l - 1]``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable

DEFAULT_CAP = 2**40


class ParamWarning(UserWarning):
    pass


class RoundedParameter(ParamWarning):
    """A derived quantity was rounded up to keep sizes integral."""


class OverflowScaleWarning(ParamWarning):
    pass


class VariantWarning(ParamWarning):
    pass


class NonIntegralLevels(ValueError):
    pass


class OverflowScale(OverflowError):
    pass


class UnknownPreset(LookupError):
    pass


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    severity: str = "error"


@dataclass(frozen=True)
class ParamSet:
    delta: float
    L: int
    r: int
    sigma: tuple[float, ...]
    d: tuple[float, ...]
    zeta: Fraction
    xi: Fraction
    gamma: Fraction
    rho: Fraction
    rho_level: tuple[float, ...]
    N: tuple[int, ...]
    n_level: tuple[int, ...]
    n: int
    tau: float = 0.0
    epsilon: float = 0.0
    sparse_degree: float | None = None
    name: str = "custom"
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def sparse(self) -> float:
        """Degree of the sparse gadgets (defaults to ``(ln n)^2``)."""
        if self.sparse_degree is not None:
            return float(self.sparse_degree)
        return math.log(self.n) ** 2

    @property
    def ground(self) -> int:
        """Number of ground slots per vertex pair."""
        g = self.rho * self.n
        return int(g) if g.denominator == 1 else math.floor(g)

    @property
    def N1(self) -> int:
        return self.N[0]

    @property
    def half(self) -> int:
        return self.n_level[-1] // 2

    def decision_threshold(self) -> float:
        return self.half - self.N1 / 4

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("zeta", "xi", "gamma", "rho"):
            f = getattr(self, k)
            out[k] = {"num": f.numerator, "den": f.denominator}
        for k in ("sigma", "d", "rho_level", "N", "n_level", "notes"):
            out[k] = list(out[k])
        out["schema"] = "params-v1"
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ParamSet":
        if data.get("schema") != "params-v1":
            raise ValueError(f"unsupported parameter schema {data.get('schema')!r}")
        kw = {k: v for k, v in data.items() if k != "schema"}
        for k in ("zeta", "xi", "gamma", "rho"):
            kw[k] = Fraction(kw[k]["num"], kw[k]["den"])
        for k in ("sigma", "d", "rho_level"):
            kw[k] = tuple(float(x) for x in kw[k])
        for k in ("N", "n_level"):
            kw[k] = tuple(int(x) for x in kw[k])
        kw["notes"] = tuple(kw.get("notes", ()))
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "ParamSet":
        return cls.from_dict(json.loads(text))


def level1_size(r: int, zeta: Fraction, xi: Fraction, N1: int) -> Fraction:
    """Vertex count of a level-1 instance, summed over its sets."""
    N1 = Fraction(N1)
    return 2 * (r - 1) * N1 + 2 * (1 - xi) * N1 + 2 * r * N1 + 2 * r * zeta * N1 + 2 * N1


def levell_size(r: int, zeta: Fraction, N: int) -> Fraction:
    N = Fraction(N)
    return 2 * r * N + 2 * r * N + 4 * r * zeta * N + 2 * N


def size_chain(L: int, r: int, zeta: Fraction, xi: Fraction, N1: int):
    """Return ``(N, n_level)`` as exact Fractions (integrality not enforced)."""
    N = [Fraction(N1)]
    n = [level1_size(r, zeta, xi, N1)]
    for _ in range(1, L):
        N.append(n[-1] / (2 * zeta))
        n.append(levell_size(r, zeta, N[-1]))
    return N, n


def certified_deficiency(p: ParamSet) -> Fraction:
    """Gap certified by the nested vertex cover of a NO instance.

    The NO matching number is at most ``n_L/2`` minus this value.
    """
    c = (1 - p.xi - p.r * p.zeta) * p.N[0]
    for lvl in range(2, p.L + 1):
        c = c / p.zeta - p.r * p.n_level[lvl - 2]
    return c


def _lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


def _default_sigma(delta: float, L: int) -> tuple[float, ...]:
    return tuple((delta / 10) ** (L + 1 - lvl) for lvl in range(1, L + 1))


def _default_epsilon(delta: float) -> float:
    try:
        return (delta / 10) ** (300 / delta**2)
    except OverflowError:
        return 0.0


def _max_densities(p: ParamSet) -> list[float]:
    from .construction import level_template

    out = []
    for lvl in range(1, p.L + 1):
        best = 0.0
        for case in (True, False):
            for g in level_template(p, lvl, case, None if p.r <= 64 else {1, 2, p.r - 1, p.r}):
                best = max(best, g.density)
        out.append(best)
    return out


def build_params(
    *,
    delta: float,
    L: int,
    r: int,
    zeta: Fraction,
    xi: Fraction,
    gamma: Fraction,
    N1: int,
    d: tuple[float, ...],
    sigma: tuple[float, ...] | None = None,
    sparse_degree: float | None = None,
    rho: Fraction | None = None,
    rho_level: tuple[float, ...] | None = None,
    ground_slots: int | None = None,
    tau: float = 0.0,
    epsilon: float | None = None,
    name: str = "custom",
) -> ParamSet:
    """Assemble a parameter set, deriving sizes and (optionally) densities.

    When neither ``rho`` nor ``ground_slots`` is given, the ground density
    is the smallest multiple of ``1/n`` covering every gadget density, and
    ``rho_level`` is the running maximum of per-level gadget densities.
    """
    zeta, xi, gamma = Fraction(zeta), Fraction(xi), Fraction(gamma)
    Ns, ns = size_chain(L, r, zeta, xi, N1)
    if any(x.denominator != 1 for x in Ns + ns):
        raise ValueError(f"non-integral size chain N={Ns} n={ns}")
    N = tuple(int(x) for x in Ns)
    n_level = tuple(int(x) for x in ns)
    n = n_level[-1] + math.floor(tau * n_level[-1])
    sigma = tuple(sigma) if sigma is not None else _default_sigma(delta, L)
    p = ParamSet(
        delta=delta, L=L, r=r, sigma=sigma, d=tuple(float(x) for x in d),
        zeta=zeta, xi=xi, gamma=gamma, rho=Fraction(1), rho_level=(1.0,) * L,
        N=N, n_level=n_level, n=n, tau=tau,
        epsilon=_default_epsilon(delta) if epsilon is None else epsilon,
        sparse_degree=sparse_degree, name=name,
    )
    if ground_slots is not None:
        rho = Fraction(ground_slots, n)
    if rho_level is None:
        dens = _max_densities(p)
        run = []
        for x in dens:
            run.append(max(x, run[-1]) if run else x)
        if rho is None:
            rho = Fraction(max(1, math.ceil(run[-1] * n - 1e-9)), n)
        run[-1] = float(rho)
        rho_level = tuple(min(x, float(rho)) for x in run)
    elif rho is None:
        rho = Fraction(rho_level[-1]).limit_denominator(n)
    return replace(p, rho=Fraction(rho), rho_level=tuple(float(x) for x in rho_level))


def theoretical_preset(
    delta: float,
    N1: int | None = None,
    *,
    xi_variant: str = "proof",
    cap: int = DEFAULT_CAP,
    strict: bool = False,
) -> ParamSet:
    """Asymptotic parameter settings.

    ``xi_variant="proof"`` uses ``xi = 1/r^4``; ``"table"`` uses ``1/r^2``.
    The result is never small enough to sample; scale problems are reported
    through :class:`OverflowScaleWarning` (or raised when ``strict``).
    """
    if not 0 < delta <= 4:
        raise ValueError("delta must lie in (0, 4]")
    fd = Fraction(delta).limit_denominator(10**6)
    ratio = 4 / fd
    if ratio.denominator != 1:
        raise NonIntegralLevels(f"4/delta = {float(ratio)} is not an integer")
    L = int(ratio)
    r_exact = (Fraction(10) / fd) ** (L + 1)
    r = math.ceil(r_exact)
    if r != r_exact:
        warnings.warn(f"r rounded up from {float(r_exact)} to {r}", RoundedParameter, stacklevel=2)
    if xi_variant not in ("proof", "table"):
        raise ValueError("xi_variant must be 'proof' or 'table'")
    zeta = Fraction(1, r * r)
    gamma = Fraction(1, r**4)
    xi = Fraction(1, r**4) if xi_variant == "proof" else Fraction(1, r**2)
    base = _lcm(zeta.denominator, xi.denominator)
    want = N1 if N1 is not None else 10**20
    N1r = -(-want // base) * base
    if N1r != want:
        warnings.warn(f"N1 rounded up from {want} to {N1r}", RoundedParameter, stacklevel=2)
    Ns, ns = size_chain(L, r, zeta, xi, N1r)
    N = tuple(int(x) for x in Ns)
    n_level = tuple(int(x) for x in ns)
    n = n_level[-1]
    ln_n = math.log(n)
    sigma = _default_sigma(delta, L)
    d = tuple(math.exp(s * ln_n) for s in sigma)
    slots = math.ceil(2 * math.exp(delta / 10 * ln_n))
    rho = Fraction(slots, n)
    rho_level = tuple(2 * math.exp((s - 1) * ln_n) for s in sigma[:-1]) + (float(rho),)
    p = ParamSet(
        delta=delta, L=L, r=r, sigma=sigma, d=d, zeta=zeta, xi=xi, gamma=gamma,
        rho=rho, rho_level=rho_level, N=N, n_level=n_level, n=n,
        epsilon=_default_epsilon(delta), name=f"theoretical-{xi_variant}-{delta:g}",
    )
    if r > cap or n * (n - 1) // 2 > cap:
        msg = f"r={r}, n={n:.3e} exceed the materialisation cap {cap}"
        if strict:
            raise OverflowScale(msg)
        warnings.warn(msg, OverflowScaleWarning, stacklevel=2)
    return p


def validate(p: ParamSet, cap: int = DEFAULT_CAP) -> list[Violation]:
    """Return every violated constraint; an empty list means usable."""
    out: list[Violation] = []

    def bad(code: str, msg: str, severity: str = "error") -> None:
        out.append(Violation(code, msg, severity))

    if not 0 < p.delta <= 4:
        bad("DeltaRange", f"delta={p.delta} outside (0, 4]")
    if p.L < 1 or p.r < 1:
        bad("LevelCount", f"L={p.L}, r={p.r} must be positive")
        return out
    for name in ("sigma", "d", "N", "n_level", "rho_level"):
        if len(getattr(p, name)) != p.L:
            bad("ChainLength", f"{name} has {len(getattr(p, name))} entries, expected {p.L}")
    if out:
        return out
    if not all(0 < s < 1 for s in p.sigma):
        bad("SigmaRange", f"sigma={p.sigma} must lie in (0, 1)")
    if not all(x > 0 for x in p.d):
        bad("DegreeRange", f"d={p.d} must be positive")
    for name in ("zeta", "xi", "gamma"):
        f = getattr(p, name)
        if not 0 < f < 1:
            bad("FractionRange", f"{name}={f} must lie in (0, 1)")
    if (1 / p.zeta).denominator != 1:
        bad("NonIntegralSize", f"1/zeta={1 / p.zeta} is not an integer")
    if 4 * p.r * p.zeta > Fraction(1, 2):
        bad("DummyBudget", f"4*r*zeta={4 * p.r * p.zeta} exceeds 1/2")
    if (p.xi * p.N[0]).denominator != 1:
        bad("NonIntegralSize", f"xi*N1={p.xi * p.N[0]} is not an integer")
    for lvl, N in enumerate(p.N, 1):
        if (p.zeta * N).denominator != 1:
            bad("NonIntegralSize", f"zeta*N_{lvl}={p.zeta * N} is not an integer")
    Ns, ns = size_chain(p.L, p.r, p.zeta, p.xi, p.N[0])
    if tuple(Ns) != tuple(Fraction(x) for x in p.N) or tuple(ns) != tuple(Fraction(x) for x in p.n_level):
        bad("SizeChain", f"stored sizes N={p.N} n={p.n_level} disagree with the recursion")
    if p.n != p.n_level[-1] + math.floor(p.tau * p.n_level[-1]):
        bad("SizeChain", f"n={p.n} does not equal n_L plus padding")
    if (p.rho * p.n).denominator != 1 or p.rho * p.n < 1:
        bad("GroundSlots", f"rho*n={float(p.rho * p.n)} must be a positive integer")
    if any(b < a * (1 - 1e-12) for a, b in zip(p.rho_level, p.rho_level[1:])):
        bad("RhoChain", f"rho_level={p.rho_level} is not nondecreasing")
    if not math.isclose(p.rho_level[-1], float(p.rho), rel_tol=1e-12):
        bad("RhoChain", f"rho_L={p.rho_level[-1]} differs from rho={float(p.rho)}")
    if any(x <= 0 for x in p.rho_level):
        bad("RhoChain", "rho_level entries must be positive")
    if all(v.code != "SizeChain" for v in out):
        from .construction import level_template

        layers = None if p.r <= 64 else {1, 2, p.r - 1, p.r}
        for lvl in range(1, p.L + 1):
            for case in (True, False):
                for g in level_template(p, lvl, case, layers):
                    if not 0 <= g.density <= 1:
                        bad("DensityRange", f"level {lvl} {'YES' if case else 'NO'} gadget {g.name}: density {g.density:.6g}")
                    elif g.density > p.rho_level[lvl - 1] * (1 + 1e-12):
                        bad("GroundOverflow", f"level {lvl} gadget {g.name}: density {g.density:.6g} > rho_{lvl}={p.rho_level[lvl - 1]:.6g}")
        if certified_deficiency(p) < Fraction(p.N[0], 2):
            bad("GapNotCertified", f"certified NO deficiency {float(certified_deficiency(p)):.6g} < N1/2={p.N[0] / 2}")
    if p.r > cap or p.n * (p.n - 1) // 2 > cap:
        bad("OverflowScale", f"r={p.r}, n={p.n} exceed cap {cap}", "warning")
    return out


def errors(p: ParamSet, cap: int = DEFAULT_CAP) -> list[Violation]:
    return [v for v in validate(p, cap) if v.severity == "error"]


def g_eval(p: ParamSet, ell: int) -> float:
    """Diagnostic function g over levels ``0..L``."""
    if not 0 <= ell <= p.L:
        raise ValueError(f"ell={ell} outside [0, {p.L}]")
    sig = (0.0,) + tuple(p.sigma) + (1.0,)
    ratio = math.fsum(sig[i] / sig[i + 1] for i in range(ell, p.L + 1))
    tail = math.fsum(sig[i] for i in range(ell, p.L))
    return (p.L - ell + 2) * p.delta - 5 * ratio - 5 * tail


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def g_properties(p: ParamSet, tol: float = 1e-12) -> dict[str, bool]:
    """Check the four standing properties of :func:`g_eval` numerically."""
    sig = (0.0,) + tuple(p.sigma)
    rec, ident = True, True
    for ell in range(2, p.L + 1):
        lhs = g_eval(p, ell - 1) - g_eval(p, ell)
        rhs = p.delta - 5 * sig[ell - 1] / sig[ell] - 5 * sig[ell - 1]
        rec &= _rel(lhs, rhs) <= tol or abs(lhs - rhs) <= tol
        lhs2 = 1 - g_eval(p, ell - 1) - 3 * sig[ell - 1]
        rhs2 = 1 - g_eval(p, ell) - p.delta + 5 * sig[ell - 1] / sig[ell] + 2 * sig[ell - 1]
        ident &= _rel(lhs2, rhs2) <= tol or abs(lhs2 - rhs2) <= tol
    return {
        "recurrence": bool(rec),
        "identity": bool(ident),
        "g1_above_2": g_eval(p, 1) > 2,
        "never_one": all(abs(1 - g_eval(p, ell)) > tol for ell in range(1, p.L + 1)),
    }


# desk presets --------------------------------------------------------------

def _tiny_l1() -> ParamSet:
    return build_params(
        delta=1.0, L=1, r=2, zeta=Fraction(1, 16), xi=Fraction(1, 16),
        gamma=Fraction(1, 96), N1=64, d=(4.5,), sparse_degree=0.3, name="tiny-L1",
    )


def _tiny_l2() -> ParamSet:
    return build_params(
        delta=1.0, L=2, r=1, zeta=Fraction(1, 16), xi=Fraction(1, 4),
        gamma=Fraction(1, 32), N1=32, d=(4.0, 32.0), sparse_degree=1.0, name="tiny-L2",
    )


def _er_l1() -> ParamSet:
    N1 = 400
    s = math.log(N1) ** 2
    return build_params(
        delta=1.0, L=1, r=1, zeta=Fraction(1, 8), xi=Fraction(3, 8),
        gamma=Fraction(1, 10), N1=N1, d=(64.0,), sparse_degree=s, name="er-L1",
    )


def scaling_preset(N1: int, delta: float = 0.5, slots_coeff: float = 20.0) -> ParamSet:
    """Sparse one-level family whose ground density decays like ``n^(sigma - 1)``.

    ``rho * n = round(slots_coeff * n^sigma_1)``; set sizes grow linearly
    with ``N1`` while the per-gadget degrees stay fixed.
    """
    zeta, xi = Fraction(1, 8), Fraction(3, 8)
    sigma = (delta / 10,)
    n = int(level1_size(1, zeta, xi, N1))
    slots = round(slots_coeff * n ** sigma[0])
    return build_params(
        delta=delta, L=1, r=1, zeta=zeta, xi=xi, gamma=Fraction(3, 40), N1=N1,
        d=(1.0,), sigma=sigma, sparse_degree=0.5, ground_slots=slots,
        name=f"scale-L1-{N1}",
    )


PRESETS: dict[str, Callable[[], ParamSet]] = {
    "tiny-L1": _tiny_l1,
    "tiny-L2": _tiny_l2,
    "er-L1": _er_l1,
    "scale-L1-n": lambda: scaling_preset(368),
    "scale-L1-2n": lambda: scaling_preset(736),
}


def desk_preset(name: str) -> ParamSet:
    try:
        return PRESETS[name]()
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def load_params(spec: str) -> ParamSet:
    """Resolve a preset name or a path to a params-v1 JSON file."""
    if spec in PRESETS:
        return desk_preset(spec)
    with open(spec) as fh:
        return ParamSet.from_json(fh.read())
