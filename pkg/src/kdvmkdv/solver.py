"""Closed-form solution families and their exact / numeric verification.

The n=1 system is solved by

    v = (2*b*d*(1+m) - a^2) / (4*b)        D = -a/(2*b)
    A = +-sqrt(3*d*m / (2*b))              B = +-sqrt(3*d / (2*b))

giving four families from the two independent sign choices.  Realness needs
b*d > 0 and m > 0.  Back-substitution is carried out exactly in the ring
extended by the formal square roots sqrtm = sqrt(m) and sqrtq = sqrt(3d/(2b))
(exponent-parity bookkeeping, denominators cleared by powers of b), so the
verdict "all seven equations reduce to the zero polynomial" carries no
floating-point tolerance.  An independent multi-start least-squares Newton
solver confirms the closed forms are the only real roots of the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ansatz import AlgebraicSystem, PdeParams
from .symexpr import ParamPoly, register_symbol

SQRT_M = "sqrtm"  # formal square root of m
SQRT_Q = "sqrtq"  # formal square root of 3d/(2b)

SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

NEWTON_MAX_STEPS = 200
NEWTON_RESIDUAL_ACCEPT = 1e-10
ROOT_DEDUP_TOL = 1e-8


class NoRealSolution(ValueError):
    """Parameters admit no real elliptic solution of this family."""


class DegenerateEquation(ValueError):
    """b = 0 degenerates the equation to KdV; the cn/dn ansatz does not apply."""


@dataclass(frozen=True)
class SolutionFamily:
    """One closed-form solution: u = A*cn(xi,m) + B*dn(xi,m) + D, xi = x - v*t."""

    A: float
    B: float
    D: float
    v: float
    sign_A: int
    sign_B: int
    params: PdeParams

    @property
    def class_label(self) -> str:
        """The sign taxonomy (sign of A*B, sign of D) labelling the family."""
        ab = "AB>0" if self.sign_A * self.sign_B > 0 else "AB<0"
        if self.D < 0:
            dd = "D<0"
        elif self.D > 0:
            dd = "D>0"
        else:
            dd = "D=0"
        return "%s,%s" % (ab, dd)

    @property
    def peak(self) -> float:
        """Value at xi = 0 (cn = dn = 1)."""
        return self.A + self.B + self.D


def solve_closed_form(p: PdeParams) -> list[SolutionFamily]:
    """The four sign families, in deterministic (sign_A, sign_B) order."""
    a, b, d, m = p.as_floats()
    if b == 0.0:
        raise DegenerateEquation("b=0 degenerates to KdV, ansatz invalid")
    if m <= 0.0:
        raise NoRealSolution("elliptic parameter must satisfy m > 0")
    if b * d <= 0.0:
        raise NoRealSolution("no real elliptic solution of this class (need b*d > 0)")
    amp = math.sqrt(1.5 * d / b)
    D = -a / (2.0 * b)
    v = (2.0 * b * d * (1.0 + m) - a * a) / (4.0 * b)
    fams = []
    for sa, sb in SIGN_PAIRS:
        fams.append(
            SolutionFamily(
                A=sa * math.sqrt(m) * amp,
                B=sb * amp,
                D=D,
                v=v,
                sign_A=sa,
                sign_B=sb,
                params=p,
            )
        )
    return fams


# ---------------------------------------------------------------------------
# exact back-substitution in the extended ring
# ---------------------------------------------------------------------------


class _Radical:
    """Element sum_{ps,pt} P_{ps,pt} * sqrtm^ps * sqrtq^pt / b^bpow with
    ParamPoly numerators; ps, pt in {0, 1} after reduction."""

    __slots__ = ("parts", "bpow", "ctx")

    def __init__(self, parts, bpow, ctx):
        self.parts = {k: v for k, v in parts.items() if v}
        self.bpow = bpow
        self.ctx = ctx

    @classmethod
    def of(cls, poly: ParamPoly, ctx, bpow: int = 0, parity=(0, 0)) -> "_Radical":
        return cls({parity: poly}, bpow, ctx)

    def _lifted(self, bpow: int) -> dict:
        if bpow == self.bpow:
            return dict(self.parts)
        scale = self.ctx["b"] ** (bpow - self.bpow)
        return {k: v * scale for k, v in self.parts.items()}

    def __add__(self, other: "_Radical") -> "_Radical":
        bpow = max(self.bpow, other.bpow)
        parts = self._lifted(bpow)
        for k, v in other._lifted(bpow).items():
            s = parts.get(k, ParamPoly.zero()) + v
            if s:
                parts[k] = s
            else:
                parts.pop(k, None)
        return _Radical(parts, bpow, self.ctx)

    def __mul__(self, other: "_Radical") -> "_Radical":
        groups: dict[int, dict] = {}
        for (s1, t1), p1 in self.parts.items():
            for (s2, t2), p2 in other.parts.items():
                poly = p1 * p2
                ps, pt = s1 + s2, t1 + t2
                extra = 0
                if ps >= 2:
                    poly = poly * self.ctx["m_sq"]
                    ps -= 2
                if pt >= 2:
                    poly = poly * self.ctx["q_sq_num"]
                    extra += self.ctx["q_sq_bpow"]
                    pt -= 2
                grp = groups.setdefault(extra, {})
                s = grp.get((ps, pt), ParamPoly.zero()) + poly
                if s:
                    grp[(ps, pt)] = s
                else:
                    grp.pop((ps, pt), None)
        base = self.bpow + other.bpow
        out = _Radical({}, 0, self.ctx)
        for extra, parts in groups.items():
            out = out + _Radical(parts, base + extra, self.ctx)
        return out

    def __pow__(self, n: int) -> "_Radical":
        out = _Radical.of(ParamPoly.const(1), self.ctx)
        for _ in range(n):
            out = out * self
        return out

    def to_poly(self) -> ParamPoly:
        """Numerator polynomial with the formal roots as registered symbols;
        zero iff the radical value is zero (b != 0)."""
        register_symbol(SQRT_M)
        register_symbol(SQRT_Q)
        out = ParamPoly.zero()
        for (ps, pt), poly in self.parts.items():
            factor = ParamPoly.const(1)
            if ps:
                factor = factor * ParamPoly.symbol(SQRT_M)
            if pt:
                factor = factor * ParamPoly.symbol(SQRT_Q)
            out = out + poly * factor
        return out


def _substitutions(
    params: dict[str, Fraction] | None,
    sign_A: int,
    sign_B: int,
) -> tuple[dict[str, "_Radical"], dict]:
    """Closed-form substitution table, symbolic (params=None) or rational."""
    if params is None:
        sym = ParamPoly.symbol
        ctx = {
            "b": sym("b"),
            "m_sq": sym("m"),
            "q_sq_num": ParamPoly.const(Fraction(3, 2)) * sym("d"),
            "q_sq_bpow": 1,
        }
        d_val = _Radical.of(ParamPoly.const(Fraction(-1, 2)) * sym("a"), ctx, bpow=1)
        v_num = (
            ParamPoly.const(Fraction(1, 2)) * sym("b") * sym("d") * (ParamPoly.const(1) + sym("m"))
            - ParamPoly.const(Fraction(1, 4)) * sym("a") ** 2
        )
        v_val = _Radical.of(v_num, ctx, bpow=1)
        subs = {}
    else:
        a, b, d, m = params["a"], params["b"], params["d"], params["m"]
        if b == 0:
            raise DegenerateEquation("b=0 degenerates to KdV, ansatz invalid")
        ctx = {
            "b": ParamPoly.const(b),
            "m_sq": ParamPoly.const(m),
            "q_sq_num": ParamPoly.const(Fraction(3, 2) * d / b),
            "q_sq_bpow": 0,
        }
        d_val = _Radical.of(ParamPoly.const(-a / (2 * b)), ctx)
        v_val = _Radical.of(ParamPoly.const((2 * b * d * (1 + m) - a * a) / (4 * b)), ctx)
        subs = {
            "a": _Radical.of(ParamPoly.const(a), ctx),
            "b": _Radical.of(ParamPoly.const(b), ctx),
            "d": _Radical.of(ParamPoly.const(d), ctx),
            "m": _Radical.of(ParamPoly.const(m), ctx),
        }
    subs["A"] = _Radical.of(ParamPoly.const(sign_A), ctx, parity=(1, 1))
    subs["B"] = _Radical.of(ParamPoly.const(sign_B), ctx, parity=(0, 1))
    subs["D"] = d_val
    subs["v"] = v_val
    return subs, ctx


def back_substitute_exact(
    system: AlgebraicSystem,
    params: dict[str, Fraction] | None = None,
    sign_A: int = 1,
    sign_B: int = 1,
    perturb: dict[str, Fraction] | None = None,
) -> list[ParamPoly]:
    """Substitute the closed forms into every equation, exactly.

    With params=None the substitution stays fully symbolic in a, b, d, m; with
    a rational params dict those four are substituted as well.  The returned
    residual polynomials are scaled by positive powers of b (harmless for the
    zero test) and may mention the formal roots sqrtm, sqrtq; a correct family
    reduces every equation to the zero polynomial.  perturb adds exact offsets
    to chosen closed-form values, e.g. {"v": Fraction(1, 10)}.
    """
    subs, ctx = _substitutions(params, sign_A, sign_B)
    if perturb:
        for name, delta in perturb.items():
            if name not in subs:
                raise KeyError("cannot perturb unknown symbol %r" % (name,))
            subs[name] = subs[name] + _Radical.of(ParamPoly.const(Fraction(delta)), ctx)
    residuals = []
    for eq in system.equations:
        acc = _Radical.of(ParamPoly.zero(), ctx)
        for mono, coef in eq.terms.items():
            term = _Radical.of(ParamPoly.const(coef), ctx)
            for s, e in mono:
                if s in subs:
                    term = term * subs[s] ** e
                else:
                    term = term * _Radical.of(ParamPoly.symbol(s) ** e, ctx)
            acc = acc + term
        residuals.append(acc.to_poly())
    return residuals


def residuals_numeric(family: SolutionFamily, system: AlgebraicSystem) -> list[float]:
    """Float residual of each equation at the family's values (fallback check
    for non-rational parameters; tolerance 1e-12 is the caller's contract)."""
    a, b, d, m = family.params.as_floats()
    bindings = {
        "a": a,
        "b": b,
        "d": d,
        "m": m,
        "A": family.A,
        "B": family.B,
        "D": family.D,
        "v": family.v,
    }
    return [eq.eval(bindings) for eq in system.equations]


# ---------------------------------------------------------------------------
# independent numeric root finding
# ---------------------------------------------------------------------------


def solve_numeric(
    system: AlgebraicSystem,
    p: PdeParams,
    seeds: int = 32,
    rng_seed: int = 0,
) -> list[np.ndarray]:
    """Multi-start damped least-squares Newton on the overdetermined system.

    Equations are pre-bound with the numeric a, b, d, m; unknowns are the
    system's unknown symbols (A, B, D, v for the first-order ansatz).  Roots
    with residual norm below 1e-10 are kept, deduplicated at distance 1e-8,
    and returned sorted lexicographically.
    """
    if seeds < 16:
        raise ValueError("seeds must be >= 16 for meaningful coverage")
    a, b, d, m = p.as_floats()
    base = {"a": a, "b": b, "d": d, "m": m}
    names = [s for s in system.unknowns if s not in base]
    eqs = list(system.equations)
    grads = [[eq.derivative(s) for s in names] for eq in eqs]

    def fval(x: np.ndarray) -> np.ndarray:
        bind = dict(base)
        bind.update(zip(names, x))
        return np.array([eq.eval(bind) for eq in eqs])

    def jval(x: np.ndarray) -> np.ndarray:
        bind = dict(base)
        bind.update(zip(names, x))
        return np.array([[g.eval(bind) for g in row] for row in grads])

    scale = max(1.0, math.sqrt(abs(1.5 * d / b)) if b else 1.0, abs(a / (2 * b)) if b else 1.0)
    rng = np.random.default_rng(rng_seed)
    roots: list[np.ndarray] = []
    for _ in range(seeds):
        x = rng.uniform(-3.0 * scale, 3.0 * scale, size=len(names))
        fx = fval(x)
        for _ in range(NEWTON_MAX_STEPS):
            norm = np.linalg.norm(fx)
            if norm < 1e-13:
                break
            J = jval(x)
            step, *_ = np.linalg.lstsq(J, fx, rcond=None)
            lam = 1.0
            for _ in range(20):
                x_new = x - lam * step
                f_new = fval(x_new)
                if np.linalg.norm(f_new) < norm:
                    break
                lam *= 0.5
            else:
                break
            x, fx = x_new, f_new
        if np.linalg.norm(fval(x)) < NEWTON_RESIDUAL_ACCEPT:
            if not any(np.linalg.norm(x - r) < ROOT_DEDUP_TOL for r in roots):
                roots.append(x)
    roots.sort(key=lambda r: tuple(r))
    return roots
