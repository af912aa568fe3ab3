"""Turn continuous time-dependent detector responses into finite efficiency
matrices.

A narrow-band Gaussian frequency filter of bandwidth B in front of the
receiver means any input reaching the detector is a train of Gaussian pulses
on a grid spaced 1/(2B); sampling the gate window on that grid makes the
response finite-dimensional. The detector itself is modeled as a positive
multiplication operator eta(t) on the time axis, and its matrix on the pulse
subspace is the Gaussian-windowed overlap matrix expressed in the
orthonormalized pulse basis:

    E = G^(-1/2) W G^(-1/2),
    W_jk = integral g(t - t_j) eta(t) g(t - t_k) dt,
    G_jk = integral g(t - t_j) g(t - t_k) dt,

which is guaranteed to satisfy 0 <= E <= I for any eta in [0, 1] and reduces
to eta * I for a constant response. Pulse width sigma = 1/(2 pi B sqrt(2)) so
the pulse bandwidth matches the filter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .detectors import EfficiencyResponse, validate_efficiency
from .errors import CoverageError, InvalidGate, NonPhysical

POINTS_PER_SPACING = 20  # fixed-step Simpson resolution
PAD_SPACINGS = 2  # integration window extension beyond the outermost samples
CLIP_BUDGET = 1e-6


@dataclass(frozen=True)
class FilteredGate:
    """Nyquist sample grid of a gate window under bandwidth B."""

    bandwidth_hz: float
    gate_start_s: float
    gate_end_s: float
    sample_times_s: np.ndarray

    @property
    def d(self) -> int:
        return self.sample_times_s.size

    @property
    def spacing_s(self) -> float:
        return 1.0 / (2.0 * self.bandwidth_hz)

    @property
    def pulse_sigma_s(self) -> float:
        return 1.0 / (2.0 * np.pi * self.bandwidth_hz * np.sqrt(2.0))


def sample_grid(bandwidth_hz: float, gate_start_s: float, gate_end_s: float) -> FilteredGate:
    """Samples spaced 1/(2B) from gate_start, covering the gate window."""
    if not (bandwidth_hz > 0.0):
        raise InvalidGate(f"bandwidth must be positive, got {bandwidth_hz}")
    if not (gate_end_s > gate_start_s):
        raise InvalidGate(f"gate end {gate_end_s} must exceed start {gate_start_s}")
    spacing = 1.0 / (2.0 * bandwidth_hz)
    n_spacings = (gate_end_s - gate_start_s) / spacing
    d = int(np.floor(n_spacings + 1e-9)) + 1
    times = gate_start_s + spacing * np.arange(d)
    times.setflags(write=False)
    return FilteredGate(
        bandwidth_hz=bandwidth_hz,
        gate_start_s=gate_start_s,
        gate_end_s=gate_end_s,
        sample_times_s=times,
    )


@dataclass(frozen=True)
class ContinuousResponse:
    """Tabulated instantaneous efficiency eta(t), linearly interpolated.

    Outside the tabulated range the edge values extend flat (only the small
    integration pad beyond the gate ever samples there).
    """

    times_s: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times_s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.shape != v.shape:
            raise ValueError("response needs matching 1-D arrays with >= 2 points")
        if not np.all(np.diff(t) > 0):
            raise ValueError("response times must be strictly increasing")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError(f"efficiencies must lie in [0, 1], got [{v.min()}, {v.max()}]")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times_s", t)
        object.__setattr__(self, "values", v)

    def __call__(self, t) -> np.ndarray:
        return np.interp(t, self.times_s, self.values)

    def covers(self, start_s: float, end_s: float) -> bool:
        return bool(self.times_s[0] <= start_s and self.times_s[-1] >= end_s)


def _require_coverage(resp: ContinuousResponse, gate: FilteredGate) -> None:
    if not resp.covers(gate.gate_start_s, gate.gate_end_s):
        raise CoverageError(
            f"response covers [{resp.times_s[0]:.3e}, {resp.times_s[-1]:.3e}] s, "
            f"gate needs [{gate.gate_start_s:.3e}, {gate.gate_end_s:.3e}] s"
        )


def _simpson_weights(n_points: int, step: float) -> np.ndarray:
    # composite Simpson; n_points is odd by construction
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (step / 3.0)


def _quadrature_grid(gate: FilteredGate) -> tuple[np.ndarray, np.ndarray]:
    spacing = gate.spacing_s
    step = spacing / POINTS_PER_SPACING
    n_steps = (gate.d - 1 + 2 * PAD_SPACINGS) * POINTS_PER_SPACING
    start = gate.sample_times_s[0] - PAD_SPACINGS * spacing
    s = start + step * np.arange(n_steps + 1)
    return s, _simpson_weights(s.size, step)


def _clip_into_physical(matrix: np.ndarray) -> np.ndarray:
    m = 0.5 * (matrix + matrix.conj().T)
    w, v = np.linalg.eigh(m)
    clip = max(0.0, float(-w.min()), float(w.max() - 1.0))
    if clip > CLIP_BUDGET:
        raise NonPhysical(f"discretized response needs clipping by {clip:.3e} to fit [0, I]")
    w = np.clip(w, 0.0, 1.0)
    return (v * w[np.newaxis, :]) @ v.conj().T


def discretize_response(resp: ContinuousResponse, gate: FilteredGate) -> EfficiencyResponse:
    """Full d x d efficiency matrix of eta(t) on the gate's pulse grid."""
    _require_coverage(resp, gate)
    s, w = _quadrature_grid(gate)
    sigma = gate.pulse_sigma_s
    pulses = np.exp(-((s[np.newaxis, :] - gate.sample_times_s[:, np.newaxis]) ** 2) / (2.0 * sigma**2))
    eta = resp(s)
    gram = (pulses * w) @ pulses.T
    weighted = (pulses * (w * eta)) @ pulses.T
    gw, gv = np.linalg.eigh(0.5 * (gram + gram.T))
    inv_root = (gv / np.sqrt(gw)[np.newaxis, :]) @ gv.T
    e = inv_root @ (0.5 * (weighted + weighted.T)) @ inv_root
    return validate_efficiency(_clip_into_physical(e))


def diagonal_only_response(resp: ContinuousResponse, gate: FilteredGate) -> EfficiencyResponse:
    """Idealized no-correlation model: diag(eta(t_1) ... eta(t_d))."""
    _require_coverage(resp, gate)
    return validate_efficiency(np.diag(resp(gate.sample_times_s)))


# --- response tabulation files ------------------------------------------------
#
# CSV schema: header line, then two columns time_ns, efficiency.


def read_response_csv(path) -> ContinuousResponse:
    times_ns = []
    values = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ValueError(f"{path}: expected a two-column CSV with a header line")
        try:
            float(header[0])
        except ValueError:
            pass
        else:
            raise ValueError(f"{path}: missing header line")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            times_ns.append(float(row[0]))
            values.append(float(row[1]))
    return ContinuousResponse(times_s=np.asarray(times_ns) * 1e-9, values=np.asarray(values))


def write_response_csv(path, times_ns, values) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_ns", "efficiency"])
        for t, v in zip(times_ns, values):
            writer.writerow([repr(float(t)), repr(float(v))])
