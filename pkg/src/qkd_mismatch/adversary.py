"""Collective-attack statistics and worst-case bound optimization.

A collective attack on the receiver is summarized by a positive operator
rho = sum_k |phi_k><phi_k| on a 4d-dimensional space: a 4-dimensional factor
carrying the Pauli coefficients of the per-qubit attack operation, tensored
with the d-dimensional auxiliary space the detectors respond to. Every
observable rate is a ratio of trace functionals of rho built from eight
constant 4x4 projectors and the detector/filter matrices:

    e_b     = Tr[rho (Z10 x E0 + Z01 x E1)] / Tr[rho (ZB0 x E0 + ZB1 x E1)]
    e_p'    = Tr[rho (Xmp x E0 + Xpm x E1)] / Tr[rho (XB0 x E0 + XB1 x E1)]
    e_p     = Tr[rho ((Xmp + Xpm) x G)]     / Tr[rho (I4 x G)]
    p_succ  = Tr[rho (I4 x G)]              / Tr[rho (ZB0 x E0 + ZB1 x E1)]

with G = C^dag C the virtual-filter Gram matrix, ZB0 = Z00 + Z10,
ZB1 = Z11 + Z01, XB0 = Xpp + Xmp, XB1 = Xmm + Xpm.

Worst-case rate certificates come from optimizing over rho:

  * constrained: minimize p_succ (resp. maximize e_p) subject to e_b and e_p'
    matching their observed values, solved by multistart local search with a
    quadratic penalty schedule on the equality constraints;
  * unconstrained: dropping the constraints yields analytic bounds
    min_i min(D_i, 1/D_i) and max_i max(D_i, 1/D_i) in terms of the mismatch
    ratios; the numeric optimizer over rho cross-validates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .detectors import DetectorPair, MismatchSpectrum
from .errors import (
    DimensionMismatch,
    DomainError,
    Infeasible,
    NonPositiveInput,
    SingularDetector,
    SolverBudgetExceeded,
    ZeroDenominator,
)
from .filtering import VirtualFilterC

DENOMINATOR_FLOOR = 1e-14
# Residual above the acceptance tolerance but below this still means the
# solver (not the constraint set) is the bottleneck.
INFEASIBILITY_RESIDUAL = 1e-4


def _projector_half(v) -> np.ndarray:
    vec = np.asarray(v, dtype=float)
    m = np.outer(vec, vec) / 2.0
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class BasisConstants:
    """The eight rank-one 4x4 projectors entering the trace functionals.

    Each is P(v)/2 for its defining vector v; the four z-type matrices sum to
    the identity, as do the four x-type ones.
    """

    z00: np.ndarray
    z10: np.ndarray
    z01: np.ndarray
    z11: np.ndarray
    xpp: np.ndarray
    xmp: np.ndarray
    xpm: np.ndarray
    xmm: np.ndarray


BASIS = BasisConstants(
    z00=_projector_half([1, 0, 0, 1]),
    z10=_projector_half([0, 1, 1, 0]),
    z01=_projector_half([0, 1, -1, 0]),
    z11=_projector_half([1, 0, 0, -1]),
    xpp=_projector_half([1, 1, 0, 0]),
    xmp=_projector_half([0, 0, -1, 1]),
    xpm=_projector_half([0, 0, 1, 1]),
    xmm=_projector_half([1, -1, 0, 0]),
)

# Attack symmetrization: sign flips of the Pauli coefficient axes that swap
# the bit-0/bit-1 roles in the z and x bases respectively, plus their product.
_SYMMETRY_GROUP = tuple(
    np.diag(np.array(signs, dtype=float))
    for signs in ((1, 1, 1, 1), (1, 1, -1, -1), (1, -1, -1, 1), (1, -1, 1, -1))
)


@dataclass(frozen=True)
class EveState:
    """Rank-r decomposition of the attack operator: rho = sum_k |v_k><v_k|."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] < 1:
            raise DimensionMismatch("EveState.vectors must have shape (rank, 4d)")
        if not np.any(np.abs(v) > 0):
            raise ValueError("EveState needs at least one nonzero vector")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def from_vector(cls, v) -> "EveState":
        return cls(vectors=np.asarray(v, dtype=complex).reshape(1, -1))


@dataclass(frozen=True)
class RateStatistics:
    """The four observable/virtual rates evaluated on one attack state."""

    e_b: float
    e_p_prime: float
    e_p: float
    p_succ: float


# Indices into the stacked operator tensor.
_K_ZDEN, _K_EBNUM, _K_XDEN, _K_EPPNUM, _K_CC, _K_EPNUM = range(6)


@dataclass(frozen=True)
class _OperatorSet:
    stacked: np.ndarray  # (6, 4d, 4d)
    dim: int


def _build_operators(pair: DetectorPair, filter_c: VirtualFilterC, symmetric: bool) -> _OperatorSet:
    e0 = pair.e0.matrix
    e1 = pair.e1.matrix
    gram = filter_c.gram
    zb0 = BASIS.z00 + BASIS.z10
    zb1 = BASIS.z11 + BASIS.z01
    xb0 = BASIS.xpp + BASIS.xmp
    xb1 = BASIS.xmm + BASIS.xpm
    xerr = BASIS.xmp + BASIS.xpm
    eye4 = np.eye(4)
    mats = [
        np.kron(zb0, e0) + np.kron(zb1, e1),
        np.kron(BASIS.z10, e0) + np.kron(BASIS.z01, e1),
        np.kron(xb0, e0) + np.kron(xb1, e1),
        np.kron(BASIS.xmp, e0) + np.kron(BASIS.xpm, e1),
        np.kron(eye4, gram),
        np.kron(xerr, gram),
    ]
    if symmetric:
        d = pair.dim
        reps = [np.kron(g, np.eye(d)) for g in _SYMMETRY_GROUP]
        mats = [sum(r @ m @ r for r in reps) / len(reps) for m in mats]
    stacked = np.stack([m.astype(complex) for m in mats])
    stacked.setflags(write=False)
    return _OperatorSet(stacked=stacked, dim=4 * pair.dim)


def _state_forms(vectors: np.ndarray, ops: _OperatorSet) -> np.ndarray:
    mv = np.einsum("kij,rj->kri", ops.stacked, vectors)
    return np.einsum("kri,ri->k", mv, vectors.conj()).real


def _stats_from_forms(forms: np.ndarray, norm2: float) -> RateStatistics:
    zden, ebn, xden, eppn, cc, epn = forms
    floor = DENOMINATOR_FLOOR * norm2
    if zden < floor or xden < floor or cc < floor:
        raise ZeroDenominator("attack state yields no conclusive events in some basis")

    def _ratio(num, den):
        return float(min(max(num / den, 0.0), 1.0))

    return RateStatistics(
        e_b=_ratio(ebn, zden),
        e_p_prime=_ratio(eppn, xden),
        e_p=_ratio(epn, cc),
        p_succ=_ratio(cc, zden),
    )


def evaluate_statistics(state: EveState, pair: DetectorPair, filter_c: VirtualFilterC) -> RateStatistics:
    """Rates of a collective-attack state against a detector pair and filter."""
    if not pair.full_rank:
        raise SingularDetector("statistics need full-rank responses")
    if state.dim != 4 * pair.dim:
        raise DimensionMismatch(f"state dimension {state.dim} != 4 * {pair.dim}")
    ops = _build_operators(pair, filter_c, symmetric=False)
    forms = _state_forms(state.vectors, ops)
    norm2 = float(np.sum(np.abs(state.vectors) ** 2))
    return _stats_from_forms(forms, norm2)


def mismatch_ratio_bounds(spectrum: MismatchSpectrum) -> tuple[float, float]:
    """Analytic worst-case bounds (success-probability floor, phase-error
    amplification ceiling) from the min and max mode-wise efficiency ratios.

    The two are exact reciprocals.
    """
    d = spectrum.ratios
    idx = int(np.argmin(np.minimum(d, 1.0 / d)))
    lo = float(min(d[idx], 1.0 / d[idx]))
    hi = float(max(d[idx], 1.0 / d[idx]))
    return lo, hi


@dataclass(frozen=True)
class SolverConfig:
    """Multistart penalty-solver knobs, all surfaced as CLI flags."""

    starts: int = 64
    rank: int = 1
    seed: int = 0
    max_iters: int = 300
    penalty_init: float = 10.0
    constraint_tol: float = 1e-5
    penalty_rounds: int = 10
    symmetric_attack: bool = False


def _unpack(theta: np.ndarray, rank: int, dim: int) -> np.ndarray:
    half = theta.size // 2
    return (theta[:half] + 1j * theta[half:]).reshape(rank, dim)


def _grad_real(coeffs: np.ndarray, mv: np.ndarray) -> np.ndarray:
    g = 2.0 * np.tensordot(coeffs, mv, axes=(0, 0))
    return np.concatenate([g.real.ravel(), g.imag.ravel()])


def _make_objective(ops: _OperatorSet, rank: int, kind: str, targets=None, mu: float = 0.0):
    """Return f(theta) -> (value, gradient) for one optimization problem.

    kind: "min_psucc" | "max_ep" (constrained, quadratic penalty weight mu)
          "min_psucc_free" | "max_ratio" (unconstrained)
    """
    stacked = ops.stacked
    dim = ops.dim

    def objective(theta):
        v = _unpack(theta, rank, dim)
        mv = np.einsum("kij,rj->kri", stacked, v)
        forms = np.einsum("kri,ri->k", mv, v.conj()).real
        zden, ebn, xden, eppn, cc, epn = forms
        coeffs = np.zeros(6)

        if kind == "max_ratio":
            # e_p / e_p' = (epn * xden) / (cc * eppn); supremum can sit on the
            # boundary where both error numerators vanish, so floor them.
            tiny = 1e-300
            epn_c = max(epn, tiny)
            eppn_c = max(eppn, tiny)
            ratio = (epn_c * xden) / (cc * eppn_c)
            coeffs[_K_EPNUM] = -ratio / epn_c
            coeffs[_K_XDEN] = -ratio / xden
            coeffs[_K_CC] = ratio / cc
            coeffs[_K_EPPNUM] = ratio / eppn_c
            return -ratio, _grad_real(coeffs, mv)

        p_succ = cc / zden
        if kind == "min_psucc_free":
            coeffs[_K_CC] = 1.0 / zden
            coeffs[_K_ZDEN] = -p_succ / zden
            return p_succ, _grad_real(coeffs, mv)

        t_eb, t_epp = targets
        eb = ebn / zden
        epp = eppn / xden
        r_eb = eb - t_eb
        r_epp = epp - t_epp
        penalty = mu * (r_eb * r_eb + r_epp * r_epp)
        coeffs[_K_EBNUM] = 2.0 * mu * r_eb / zden
        coeffs[_K_XDEN] = -2.0 * mu * r_epp * epp / xden
        coeffs[_K_EPPNUM] = 2.0 * mu * r_epp / xden

        if kind == "min_psucc":
            coeffs[_K_CC] += 1.0 / zden
            coeffs[_K_ZDEN] = -(p_succ + 2.0 * mu * r_eb * eb) / zden
            return p_succ + penalty, _grad_real(coeffs, mv)
        if kind == "max_ep":
            e_p = epn / cc
            coeffs[_K_EPNUM] = -1.0 / cc
            coeffs[_K_CC] += e_p / cc
            coeffs[_K_ZDEN] = -2.0 * mu * r_eb * eb / zden
            return -e_p + penalty, _grad_real(coeffs, mv)
        raise ValueError(f"unknown objective kind {kind!r}")

    return objective


def _local_minimize(objective, theta0: np.ndarray, max_iters: int) -> np.ndarray:
    res = _scipy_minimize(
        objective,
        theta0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iters, "ftol": 1e-14, "gtol": 1e-10},
    )
    theta = res.x
    norm = np.linalg.norm(theta)
    return theta / norm if norm > 0 else theta


def _constraint_residual(forms: np.ndarray, targets) -> float:
    zden, ebn, xden, eppn, _, _ = forms
    return max(abs(ebn / zden - targets[0]), abs(eppn / xden - targets[1]))


def _symmetrized_vectors(vectors: np.ndarray, d: int) -> np.ndarray:
    reps = [np.kron(g, np.eye(d)) for g in _SYMMETRY_GROUP]
    scale = 1.0 / math.sqrt(len(reps))
    return np.vstack([scale * (r @ vectors.T).T for r in reps])


def _witness_state(vectors: np.ndarray, pair: DetectorPair, symmetric: bool) -> EveState:
    if symmetric:
        return EveState(vectors=_symmetrized_vectors(vectors, pair.dim))
    return EveState(vectors=vectors)


def _validate_observed(observed_eb: float, observed_epp: float) -> None:
    for name, value in (("e_b", observed_eb), ("e_p'", observed_epp)):
        if not (0.0 <= value <= 0.5):
            raise DomainError(f"observed {name} must lie in [0, 0.5], got {value}")


def _solve_constrained(
    pair: DetectorPair,
    filter_c: VirtualFilterC,
    observed_eb: float,
    observed_epp: float,
    config: SolverConfig,
    kind: str,
) -> tuple[float, EveState]:
    _validate_observed(observed_eb, observed_epp)
    if not pair.full_rank:
        raise SingularDetector("bound optimization needs full-rank responses")
    ops = _build_operators(pair, filter_c, symmetric=config.symmetric_attack)
    targets = (observed_eb, observed_epp)
    rng = np.random.default_rng(config.seed)
    n_params = 2 * config.rank * ops.dim

    candidates = []
    best_residual = math.inf
    for _ in range(config.starts):
        theta = rng.standard_normal(n_params)
        theta /= np.linalg.norm(theta)
        mu = config.penalty_init
        residual = math.inf
        for _ in range(config.penalty_rounds):
            objective = _make_objective(ops, config.rank, kind, targets=targets, mu=mu)
            theta = _local_minimize(objective, theta, config.max_iters)
            forms = _state_forms(_unpack(theta, config.rank, ops.dim), ops)
            residual = _constraint_residual(forms, targets)
            if residual < config.constraint_tol:
                break
            mu *= 10.0
        best_residual = min(best_residual, residual)
        if residual < config.constraint_tol:
            value = forms[_K_CC] / forms[_K_ZDEN] if kind == "min_psucc" else forms[_K_EPNUM] / forms[_K_CC]
            candidates.append((value, theta, mu))

    if not candidates:
        if best_residual < INFEASIBILITY_RESIDUAL:
            raise SolverBudgetExceeded(
                f"constraints reached residual {best_residual:.2e}, short of {config.constraint_tol:.0e}"
            )
        raise Infeasible(
            f"no attack state matched the observed rates (best residual {best_residual:.2e})"
        )

    pick = min if kind == "min_psucc" else max
    _, theta_best, mu_best = pick(candidates, key=lambda item: item[0])
    # Pull the winner tighter onto the constraint manifold: the stop-at-first-
    # feasible residual leaves a small slack that biases the objective.
    theta, mu = theta_best, mu_best
    for _ in range(3):
        mu *= 10.0
        objective = _make_objective(ops, config.rank, kind, targets=targets, mu=mu)
        theta_new = _local_minimize(objective, theta, config.max_iters)
        forms = _state_forms(_unpack(theta_new, config.rank, ops.dim), ops)
        if _constraint_residual(forms, targets) <= config.constraint_tol:
            theta = theta_new
    witness = _witness_state(_unpack(theta, config.rank, ops.dim), pair, config.symmetric_attack)
    stats = evaluate_statistics(witness, pair, filter_c)
    value = stats.p_succ if kind == "min_psucc" else stats.e_p
    return value, witness


def minimize_filter_success(
    pair: DetectorPair,
    filter_c: VirtualFilterC,
    observed_eb: float,
    observed_epp: float,
    config: SolverConfig = SolverConfig(),
) -> tuple[float, EveState]:
    """Worst-case virtual-filtering success probability at the observed rates.

    Returns the smallest p_succ found over attack states consistent with the
    observed bit and phase error rates, plus the witness state attaining it.
    """
    return _solve_constrained(pair, filter_c, observed_eb, observed_epp, config, "min_psucc")


def maximize_phase_error(
    pair: DetectorPair,
    filter_c: VirtualFilterC,
    observed_eb: float,
    observed_epp: float,
    config: SolverConfig = SolverConfig(),
) -> tuple[float, EveState]:
    """Worst-case virtual phase error rate at the observed rates."""
    return _solve_constrained(pair, filter_c, observed_eb, observed_epp, config, "max_ep")


def optimize_unconstrained_bounds(
    pair: DetectorPair,
    filter_c: VirtualFilterC,
    config: SolverConfig = SolverConfig(),
) -> tuple[float, float]:
    """Numerically optimize the two bound objectives with no constraints.

    Returns (min p_succ, max e_p / e_p') over attack states; cross-validates
    the analytic `mismatch_ratio_bounds` values.
    """
    if not pair.full_rank:
        raise SingularDetector("bound optimization needs full-rank responses")
    ops = _build_operators(pair, filter_c, symmetric=config.symmetric_attack)
    rng = np.random.default_rng(config.seed)
    n_params = 2 * config.rank * ops.dim

    best = {"min_psucc_free": math.inf, "max_ratio": math.inf}
    for kind in best:
        objective = _make_objective(ops, config.rank, kind)
        for _ in range(config.starts):
            theta = rng.standard_normal(n_params)
            theta /= np.linalg.norm(theta)
            theta = _local_minimize(objective, theta, config.max_iters)
            value, _ = objective(theta)
            best[kind] = min(best[kind], value)
    if not all(math.isfinite(v) for v in best.values()):
        raise SolverBudgetExceeded("unconstrained bound optimization did not converge")
    return best["min_psucc_free"], -best["max_ratio"]


def mediant_check(a1, a2, b1, b2) -> bool:
    """Check (a1/a2 >= b1/b2) implies (a1/a2 >= (a1+b1)/(a2+b2)), exactly.

    Evaluated in rational arithmetic so floating-point rounding cannot
    produce a spurious counterexample; holds for all positive inputs.
    """
    values = (a1, a2, b1, b2)
    for v in values:
        if not (isinstance(v, (int, float, Fraction)) and math.isfinite(float(v)) and v > 0):
            raise NonPositiveInput(f"inputs must be finite positive reals, got {v!r}")
    fa1, fa2, fb1, fb2 = (Fraction(v) for v in values)
    premise = fa1 * fb2 >= fb1 * fa2
    conclusion = fa1 * (fa2 + fb2) >= (fa1 + fb1) * fa2
    return (not premise) or conclusion
