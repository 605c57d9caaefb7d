"""Time-varying symmetric matrix flows: definition, composition, sampling.

A flow is a pure function of time returning a dense symmetric matrix.
Samplers author the upper triangle and mirror it, so every sample equals
its transpose exactly -- nothing is symmetrized after the fact.  The two
bundled 7x7 benchmark flows (a smooth one and a jump-perturbed variant)
drive most of the test scenarios; ``with_jumps`` splices them at chosen
switch times and ``conjugate`` hides their sparsity behind a random
orthogonal similarity without touching the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MatrixFlow",
    "JumpSchedule",
    "OrthogonalRandomizer",
    "SpanError",
    "FlowFileError",
    "InterpolationError",
    "builtin_flows",
    "conjugate",
    "with_jumps",
    "constant_flow",
    "diag_linear_flow",
    "flow_from_file",
    "write_flow_file",
]


class SpanError(ValueError):
    """Sampling time outside the flow's declared span."""


class FlowFileError(ValueError):
    """Malformed or inconsistent flow file."""


class InterpolationError(ValueError):
    """File-backed flows refuse queries between recorded instants."""


def _mirror_upper(M: np.ndarray) -> np.ndarray:
    upper = np.triu(M, 1)
    return upper + upper.T + np.diag(np.diag(M))


@dataclass
class MatrixFlow:
    """A symmetric matrix flow: dimension, sampler, label, time span."""

    n: int
    sampler: Callable[[float], np.ndarray]
    label: str = ""
    span: tuple = (-math.inf, math.inf)

    def sample(self, t: float) -> np.ndarray:
        lo, hi = self.span
        if not (lo <= t <= hi):
            raise SpanError(
                f"t={t} outside span [{lo}, {hi}] of flow {self.label!r}")
        return self.sampler(t)

    __call__ = sample


@dataclass(frozen=True)
class JumpSchedule:
    """Strictly increasing switch times; flows toggle at each one."""

    times: tuple

    def __init__(self, times: Sequence[float]):
        times = tuple(float(t) for t in times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("switch times must be strictly increasing")
        object.__setattr__(self, "times", times)


@dataclass(frozen=True)
class OrthogonalRandomizer:
    """A seeded random orthogonal matrix for similarity conjugation."""

    U: np.ndarray
    seed: int

    @classmethod
    def from_seed(cls, n: int, seed: int) -> "OrthogonalRandomizer":
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((n, n))
        Q, R = np.linalg.qr(M)
        d = np.diag(R)
        Q = Q * np.where(d < 0.0, -1.0, 1.0)[None, :]
        return cls(U=Q, seed=int(seed))

    def __post_init__(self):
        n = self.U.shape[0]
        dev = np.linalg.norm(self.U.T @ self.U - np.eye(n))
        if dev > 1e-12:
            raise ValueError(f"matrix is not orthogonal (deviation {dev:.2e})")


def _a_s_upper(t: float) -> np.ndarray:
    """Upper triangle of the smooth 7x7 benchmark flow."""
    est, ect = math.exp(math.sin(t)), math.exp(math.cos(t))
    M = np.zeros((7, 7))
    M[0, 0] = math.sin(t) + 2.0
    M[0, 1] = est
    M[0, 3] = -est
    M[0, 4] = 0.5
    M[0, 5] = 1.0 + math.cos(t)
    M[1, 1] = math.cos(t) - 2.0
    M[1, 3] = 1.0
    M[1, 4] = math.cos(2.0 * t)
    M[1, 5] = 1.0
    M[2, 2] = -0.12 * t * t + 2.4 * t - 7.0
    M[3, 3] = 1.0 / (t + 1.0)
    M[3, 4] = math.atan(t)
    M[3, 5] = math.sin(2.0 * t)
    M[4, 4] = 1.0
    M[4, 5] = ect
    M[5, 5] = 1.0 / (t + 2.0)
    M[6, 6] = -0.15 * t * t + 3.0 * t - 6.0
    return M


def _a_sj_upper(t: float) -> np.ndarray:
    """Upper triangle of the jump-perturbed variant.

    Differs from the smooth flow at (1,5), (2,2), (3,3), (4,5), (4,6),
    (5,5), (6,6), (7,7) and their mirror images (1-indexed).
    """
    M = _a_s_upper(t)
    M[0, 4] = 0.0
    M[1, 1] = 0.0
    M[2, 2] = 1.3 * t - 15.0
    M[3, 4] = 1.0
    M[3, 5] = 2.0 * math.cos(2.0 * t)
    M[4, 4] = -3.0
    M[5, 5] = 6.0 / (t + 2.0)
    M[6, 6] = 14.05 - t
    return M


def builtin_flows():
    """The two bundled 7x7 benchmark flows, keyed "A_s" and "A_sj"."""
    span = (-0.99, math.inf)   # keeps clear of the 1/(t+1) pole
    return {
        "A_s": MatrixFlow(7, lambda t: _mirror_upper(_a_s_upper(t)),
                          label="A_s", span=span),
        "A_sj": MatrixFlow(7, lambda t: _mirror_upper(_a_sj_upper(t)),
                           label="A_sj", span=span),
    }


def conjugate(flow: MatrixFlow, rand: OrthogonalRandomizer) -> MatrixFlow:
    """Similarity-transform a flow by a fixed orthogonal matrix.

    Samples become U^T A(t) U: dense, but with the spectrum of A(t).  The
    product's upper triangle is authored and mirrored so the output stays
    exactly symmetric despite floating-point evaluation order.
    """
    U = rand.U
    if U.shape[0] != flow.n:
        raise ValueError(
            f"randomizer dimension {U.shape[0]} != flow dimension {flow.n}")

    def sampler(t: float) -> np.ndarray:
        return _mirror_upper(U.T @ flow.sampler(t) @ U)

    return MatrixFlow(flow.n, sampler, label=f"{flow.label}~seed{rand.seed}",
                      span=flow.span)


def with_jumps(base: MatrixFlow, alt: MatrixFlow,
               schedule: JumpSchedule) -> MatrixFlow:
    """Piecewise flow that toggles between base and alt at switch times.

    The active flow changes on half-open intervals [switch, next-switch):
    base before the first switch, alt from the first to the second, base
    again from the second, and so on.  No smoothing at switches.
    """
    if base.n != alt.n:
        raise ValueError(f"dimension mismatch: {base.n} != {alt.n}")
    times = schedule.times
    lo = max(base.span[0], alt.span[0])
    hi = min(base.span[1], alt.span[1])

    def sampler(t: float) -> np.ndarray:
        count = sum(1 for s in times if t >= s)
        active = base if count % 2 == 0 else alt
        return active.sampler(t)

    label = f"{base.label}|{alt.label}@{list(times)}"
    return MatrixFlow(base.n, sampler, label=label, span=(lo, hi))


def constant_flow(M, label: str = "constant") -> MatrixFlow:
    M = np.asarray(M, dtype=float)
    M = _mirror_upper(M)
    return MatrixFlow(M.shape[0], lambda t: M.copy(), label=label)


def diag_linear_flow() -> MatrixFlow:
    """diag(2+t, 5): closed-form spectrum, used as a tracking oracle."""

    def sampler(t: float) -> np.ndarray:
        return np.array([[2.0 + t, 0.0], [0.0, 5.0]])

    return MatrixFlow(2, sampler, label="diag-linear")


_GRID_REL_TOL = 1e-9


def flow_from_file(path) -> MatrixFlow:
    """Load an equally spaced sampled flow from a plain-text file.

    Format: a header line ``n=<dim> tau=<gap> t0=<start>`` followed by one
    block per sample -- n lines of n space-separated numbers -- with blank
    lines between blocks.  The flow is defined only at the recorded
    instants; queries in between raise InterpolationError.  Samples whose
    asymmetry exceeds 1e-12 (max entry difference) are rejected outright.
    """
    with open(path) as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines:
        raise FlowFileError("empty flow file")
    header = lines[0].split()
    fields = {}
    for tok in header:
        if "=" not in tok:
            raise FlowFileError(f"bad header token {tok!r}")
        key, _, val = tok.partition("=")
        fields[key] = val
    try:
        n = int(fields["n"])
        tau = float(fields["tau"])
        t0 = float(fields["t0"])
    except (KeyError, ValueError) as exc:
        raise FlowFileError(f"header must give n, tau, t0: {exc}") from exc
    if n <= 0:
        raise FlowFileError(f"bad dimension n={n}")
    if tau <= 0:
        raise FlowFileError(f"sampling gap must be positive, got {tau}")

    samples = []
    block = []
    for raw in lines[1:] + [""]:
        if raw.strip():
            block.append(raw)
            continue
        if not block:
            continue
        if len(block) != n:
            raise FlowFileError(
                f"sample block {len(samples)} has {len(block)} rows, expected {n}")
        try:
            M = np.array([[float(x) for x in row.split()] for row in block])
        except ValueError as exc:
            raise FlowFileError(f"non-numeric entry: {exc}") from exc
        if M.shape != (n, n):
            raise FlowFileError(
                f"sample block {len(samples)} is {M.shape}, expected ({n}, {n})")
        if np.abs(M - M.T).max() > 1e-12:
            raise FlowFileError(
                f"sample block {len(samples)} is asymmetric beyond tolerance")
        samples.append(_mirror_upper(M))
        block = []
    if not samples:
        raise FlowFileError("no sample blocks found")
    data = np.array(samples)
    count = len(samples)
    hi = t0 + (count - 1) * tau

    def sampler(t: float) -> np.ndarray:
        k = round((t - t0) / tau)
        if abs(t - (t0 + k * tau)) > _GRID_REL_TOL * tau:
            raise InterpolationError(
                f"t={t} is between recorded instants (gap {tau})")
        if not 0 <= k < count:
            raise SpanError(f"t={t} outside recorded range")
        return data[k].copy()

    return MatrixFlow(n, sampler, label=f"file:{path}", span=(t0, hi))


def write_flow_file(path, flow: MatrixFlow, t0: float, tau: float,
                    count: int) -> None:
    """Record ``count`` equally spaced samples of a flow to a text file.

    Numbers are written with 17 significant digits, so reading the file
    back reproduces the sampled matrices bit for bit.
    """
    if tau <= 0:
        raise ValueError("sampling gap must be positive")
    if count < 1:
        raise ValueError("need at least one sample")
    out = [f"n={flow.n} tau={tau:.17g} t0={t0:.17g}"]
    for k in range(count):
        M = flow.sample(t0 + k * tau)
        for row in M:
            out.append(" ".join(f"{x:.17g}" for x in row))
        out.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(out))
