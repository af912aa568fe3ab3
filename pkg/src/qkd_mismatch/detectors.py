"""Two-detector receiver model.

A detector with a matrix-valued efficiency response clicks on an auxiliary
input state rho with probability Tr(rho E), where E is a d x d Hermitian
matrix with 0 <= E <= I. The pair of responses (E0, E1) for the bit-0 and
bit-1 detectors, factored as E_i = F_i^dag F_i, determines the mismatch
spectrum: the eigenvalues D_1..D_d of F0 (F1^dag F1)^-1 F0^dag, which are the
per-mode efficiency ratios between the detectors and drive every key-rate
formula in this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidEfficiency, NotHermitian, SingularDetector

# Eigenvalues below this relative cutoff count as zero when flagging rank.
RANK_RTOL = 1e-10
# Nullspace projectors closer than this are treated as identical (Frobenius).
NULLSPACE_TOL = 1e-8


@dataclass(frozen=True)
class EfficiencyResponse:
    """Validated d x d efficiency matrix E with 0 <= E <= I."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        """Per-sample efficiencies (real diagonal of E)."""
        return self.matrix.diagonal().real.copy()


def validate_efficiency(raw) -> EfficiencyResponse:
    """Check Hermiticity and the spectrum window [0, 1]; return the response."""
    try:
        m = linalg.require_hermitian(raw)
    except NotHermitian as exc:
        raise InvalidEfficiency(str(exc)) from exc
    tol = linalg.PSD_RTOL * max(1.0, linalg.frobenius(m))
    w = np.linalg.eigvalsh(m)
    if w.min() < -tol or w.max() > 1.0 + tol:
        raise InvalidEfficiency(
            f"efficiency eigenvalues [{w.min():.6g}, {w.max():.6g}] outside [0, 1]"
        )
    m = m.copy()
    m.setflags(write=False)
    return EfficiencyResponse(matrix=m)


@dataclass(frozen=True)
class DetectorPair:
    """Responses of both detectors plus their principal-square-root factors."""

    e0: EfficiencyResponse
    e1: EfficiencyResponse
    f0: np.ndarray
    f1: np.ndarray
    full_rank0: bool
    full_rank1: bool

    @property
    def dim(self) -> int:
        return self.e0.dim

    @property
    def full_rank(self) -> bool:
        return self.full_rank0 and self.full_rank1


@dataclass(frozen=True)
class MismatchSpectrum:
    """Eigen-decomposition U diag(D) U^dag of F0 (F1^dag F1)^-1 F0^dag.

    `ratios` holds D_1 >= ... >= D_d > 0, the mode-wise efficiency ratios.
    """

    ratios: np.ndarray
    basis: np.ndarray


def _is_full_rank(e: EfficiencyResponse) -> bool:
    w = np.linalg.eigvalsh(e.matrix)
    return bool(w.min() > RANK_RTOL * max(1.0, linalg.frobenius(e.matrix)))


def load_pair(e0_raw, e1_raw) -> DetectorPair:
    """Validate two raw efficiency matrices and factor them."""
    e0 = validate_efficiency(e0_raw)
    e1 = validate_efficiency(e1_raw)
    if e0.dim != e1.dim:
        raise DimensionMismatch(f"detector dimensions differ: {e0.dim} vs {e1.dim}")
    f0 = linalg.principal_sqrt(e0.matrix)
    f1 = linalg.principal_sqrt(e1.matrix)
    f0.setflags(write=False)
    f1.setflags(write=False)
    return DetectorPair(
        e0=e0,
        e1=e1,
        f0=f0,
        f1=f1,
        full_rank0=_is_full_rank(e0),
        full_rank1=_is_full_rank(e1),
    )


def swap_detectors(pair: DetectorPair) -> DetectorPair:
    """Exchange the roles of the bit-0 and bit-1 detectors."""
    return DetectorPair(
        e0=pair.e1,
        e1=pair.e0,
        f0=pair.f1,
        f1=pair.f0,
        full_rank0=pair.full_rank1,
        full_rank1=pair.full_rank0,
    )


def mismatch_spectrum(pair: DetectorPair) -> MismatchSpectrum:
    """Efficiency-ratio spectrum of the pair; requires both detectors full rank."""
    if not pair.full_rank:
        raise SingularDetector("mismatch spectrum needs full-rank responses")
    e1_inv = np.linalg.inv(pair.e1.matrix)
    m = pair.f0 @ e1_inv @ pair.f0.conj().T
    eig = linalg.hermitian_eig(m)
    ratios = eig.eigenvalues.copy()
    if ratios.min() <= 0.0:
        raise SingularDetector("nonpositive efficiency ratio; responses too singular")
    ratios.setflags(write=False)
    basis = eig.eigenvectors.copy()
    basis.setflags(write=False)
    return MismatchSpectrum(ratios=ratios, basis=basis)


def _nullspace_projector(e: EfficiencyResponse) -> tuple[np.ndarray, np.ndarray]:
    """Return (null projector, range basis columns) at the rank cutoff."""
    eig = linalg.hermitian_eig(e.matrix)
    cutoff = RANK_RTOL * max(1.0, linalg.frobenius(e.matrix))
    keep = eig.eigenvalues > cutoff
    v_range = eig.eigenvectors[:, keep]
    v_null = eig.eigenvectors[:, ~keep]
    return v_null @ v_null.conj().T, v_range


def deflate_common_nullspace(pair: DetectorPair) -> DetectorPair:
    """Reduce a rank-deficient pair to the shared range of both responses.

    Valid only when both responses are singular with matching nullspaces;
    any other rank-deficient configuration admits no key and raises
    SingularDetector.
    """
    if pair.full_rank:
        return pair
    if pair.full_rank0 != pair.full_rank1:
        raise SingularDetector("nullspaces differ: only one detector is singular")
    p0, v_range = _nullspace_projector(pair.e0)
    p1, _ = _nullspace_projector(pair.e1)
    if linalg.frobenius(p0 - p1) > NULLSPACE_TOL:
        raise SingularDetector("detectors are singular with different nullspaces")
    if v_range.shape[1] == 0:
        raise SingularDetector("both responses vanish entirely")
    e0_red = v_range.conj().T @ pair.e0.matrix @ v_range
    e1_red = v_range.conj().T @ pair.e1.matrix @ v_range
    return load_pair(e0_red, e1_red)


# --- detector spec files -----------------------------------------------------
#
# JSON schema: {"dimension": d, "E0": [[[re, im], ...], ...], "E1": ...,
#               "label0": str, "label1": str}; matrices row-major.


@dataclass(frozen=True)
class DetectorSpecFile:
    e0_raw: np.ndarray
    e1_raw: np.ndarray
    label0: str
    label1: str

    @property
    def dim(self) -> int:
        return self.e0_raw.shape[0]


def _matrix_from_pairs(rows, dim: int, name: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (dim, dim, 2):
        raise ValueError(f"{name}: expected {dim}x{dim} [re, im] entries, got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def read_spec_file(path) -> DetectorSpecFile:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        dim = int(doc["dimension"])
        e0 = _matrix_from_pairs(doc["E0"], dim, "E0")
        e1 = _matrix_from_pairs(doc["E1"], dim, "E1")
    except KeyError as exc:
        raise ValueError(f"detector spec missing key: {exc}") from exc
    return DetectorSpecFile(
        e0_raw=e0,
        e1_raw=e1,
        label0=str(doc.get("label0", "detector0")),
        label1=str(doc.get("label1", "detector1")),
    )


def write_spec_file(path, e0, e1, label0: str = "detector0", label1: str = "detector1") -> None:
    m0 = linalg.as_matrix(e0)
    m1 = linalg.as_matrix(e1)
    if m0.shape != m1.shape or m0.shape[0] != m0.shape[1]:
        raise DimensionMismatch("detector spec needs two square matrices of equal size")
    doc = {
        "dimension": m0.shape[0],
        "E0": _matrix_to_pairs(m0),
        "E1": _matrix_to_pairs(m1),
        "label0": label0,
        "label1": label1,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
