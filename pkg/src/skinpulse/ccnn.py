"""Continuous coupled neural network (CCNN), one neuron per pixel.

Each neuron carries feeding ``F``, linking ``L``, modulation ``U``, dynamic
threshold ``E`` and a sigmoid output ``Y``. One step reads only the previous
step's state::

    F(n) = exp(-alpha_f) F(n-1) + v_f (M * Y(n-1)) + S
    L(n) = exp(-alpha_l) L(n-1) + v_l (W * Y(n-1))
    U(n) = F(n) (1 + beta L(n))
    E(n) = exp(-alpha_e) E(n-1) + v_e Y(n-1)
    Y(n) = sigmoid(U(n) - E(n))

where ``*`` is a zero-padded 3x3 correlation with a synaptic weight map.

Under constant drive the shipped parameters settle on a short periodic orbit,
while a sinusoidal drive keeps them aperiodic. :func:`calibrate_dichotomy`
is the check that certifies this.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import expit

from .errors import BadWindowLength, DimensionMismatch, InvalidInput, NoParamsFound

logger = logging.getLogger(__name__)


def inverse_square_kernel() -> np.ndarray:
    """3x3 weights ``1/d**2`` to each neighbour, zero at the centre."""
    k = np.array([[0.5, 1.0, 0.5], [1.0, 0.0, 1.0], [0.5, 1.0, 0.5]])
    k.flags.writeable = False
    return k


def _check_kernel(k: np.ndarray, name: str) -> np.ndarray:
    k = np.array(k, dtype=np.float64)
    if k.shape != (3, 3):
        raise InvalidInput(f"{name} must be 3x3, got {k.shape}")
    if (k < 0).any() or k[1, 1] != 0.0:
        raise InvalidInput(f"{name} must be non-negative with a zero centre")
    k.flags.writeable = False
    return k


@dataclass(frozen=True)
class CcnnParams:
    alpha_f: float
    alpha_l: float
    alpha_e: float
    v_f: float
    v_l: float
    v_e: float
    beta: float
    m_kernel: np.ndarray = field(default_factory=inverse_square_kernel)
    w_kernel: np.ndarray = field(default_factory=inverse_square_kernel)
    # stimulus S = input_offset + input_gain * I
    input_gain: float = 1.0
    input_offset: float = 0.0

    def __post_init__(self):
        for name in ("alpha_f", "alpha_l", "alpha_e"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"{name} must be > 0")
        object.__setattr__(self, "m_kernel", _check_kernel(self.m_kernel, "m_kernel"))
        object.__setattr__(self, "w_kernel", _check_kernel(self.w_kernel, "w_kernel"))

    @property
    def decay(self) -> tuple[float, float, float]:
        return math.exp(-self.alpha_f), math.exp(-self.alpha_l), math.exp(-self.alpha_e)

    def stimulus(self, i_values: np.ndarray) -> np.ndarray:
        return self.input_offset + self.input_gain * np.asarray(i_values, dtype=np.float64)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m_kernel"] = self.m_kernel.tolist()
        d["w_kernel"] = self.w_kernel.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CcnnParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidInput(f"unknown CCNN parameter(s): {sorted(unknown)}")
        kwargs = dict(d)
        for k in ("m_kernel", "w_kernel"):
            if k in kwargs:
                kwargs[k] = np.asarray(kwargs[k], dtype=np.float64)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise InvalidInput(f"incomplete CCNN parameters: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, CcnnParams):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))


@lru_cache(maxsize=1)
def _default_config() -> dict:
    text = resources.files("skinpulse").joinpath("data/ccnn_default.json").read_text(encoding="utf-8")
    return json.loads(text)


def default_params() -> CcnnParams:
    """Shipped defaults, as frozen by the calibration sweep."""
    return CcnnParams.from_dict(_default_config()["params"])


def load_params(path) -> CcnnParams:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return CcnnParams.from_dict(raw.get("params", raw))


@dataclass(frozen=True)
class CcnnState:
    F: np.ndarray
    L: np.ndarray
    U: np.ndarray
    E: np.ndarray
    Y: np.ndarray

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "CcnnState":
        z = np.zeros(tuple(shape))
        return cls(z, z, z, z, z)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.Y.shape


def correlate3(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Zero-padded 3x3 correlation over the last two axes (leading axes are batch)."""
    h, w = x.shape[-2:]
    pad = [(0, 0)] * (x.ndim - 2) + [(1, 1), (1, 1)]
    p = np.pad(x, pad)
    out = np.zeros_like(x, dtype=np.float64)
    for di in range(3):
        for dj in range(3):
            k = kernel[di, dj]
            if k != 0.0:
                out += k * p[..., di : di + h, dj : dj + w]
    return out


def ccnn_step(state: CcnnState, S: np.ndarray, params: CcnnParams) -> CcnnState:
    S = np.asarray(S, dtype=np.float64)
    if S.shape != state.shape:
        raise DimensionMismatch(f"stimulus shape {S.shape} != state shape {state.shape}")
    df, dl, de = params.decay
    F = df * state.F + params.v_f * correlate3(state.Y, params.m_kernel) + S
    L = dl * state.L + params.v_l * correlate3(state.Y, params.w_kernel)
    U = F * (1.0 + params.beta * L)
    E = de * state.E + params.v_e * state.Y
    Y = expit(U - E)
    return CcnnState(F, L, U, E, Y)


def run_lattice(params: CcnnParams, stimuli: Iterable[np.ndarray], shape: Sequence[int]) -> np.ndarray:
    """Step a freshly reset lattice through ``stimuli``; returns the Y trajectory."""
    state = CcnnState.zeros(shape)
    out = []
    for S in stimuli:
        state = ccnn_step(state, np.broadcast_to(S, state.shape), params)
        out.append(state.Y)
    return np.array(out)


def encode_window(
    pixel_I: Sequence[float],
    params: CcnnParams,
    neighborhood_I: np.ndarray | None = None,
) -> np.ndarray:
    """Encode a 3-frame I-channel series into a 3-sample CCNN output series.

    ``neighborhood_I`` is the ``(3, 3, 3)`` (time, row, col) patch around the
    pixel; without it the neighbours are assumed to see the pixel's own input.
    The 3x3 lattice starts from the zero state and the centre neuron's Y is
    returned for each of the three steps.
    """
    series = np.asarray(pixel_I, dtype=np.float64)
    if series.shape != (3,):
        raise BadWindowLength(f"window must hold exactly 3 samples, got shape {series.shape}")
    if neighborhood_I is None:
        patch = np.broadcast_to(series[:, None, None], (3, 3, 3))
    else:
        patch = np.asarray(neighborhood_I, dtype=np.float64)
        if patch.shape != (3, 3, 3):
            raise DimensionMismatch(f"neighbourhood must be (3, 3, 3), got {patch.shape}")
        if not np.array_equal(patch[:, 1, 1], series):
            raise InvalidInput("neighbourhood centre does not match the pixel series")
    Y = run_lattice(params, params.stimulus(patch), (3, 3))
    return Y[:, 1, 1].copy()


def detect_period(
    trajectory: np.ndarray,
    max_period: int,
    tol: float = 1e-6,
    window: int = 200,
) -> int | None:
    """Smallest ``p <= max_period`` with ``max |Y(n) - Y(n-p)| < tol`` over the last ``window`` steps.

    ``trajectory`` is ``(T, ...)``; every trailing element must repeat.
    """
    y = np.asarray(trajectory, dtype=np.float64).reshape(len(trajectory), -1)
    n = len(y)
    if n < window + max_period:
        raise InvalidInput(f"trajectory of {n} steps too short for window {window} + period {max_period}")
    tail = y[n - window :]
    for p in range(1, max_period + 1):
        if np.max(np.abs(tail - y[n - window - p : n - p])) < tol:
            return p
    return None


@dataclass(frozen=True)
class DichotomyProbe:
    """Inputs for the periodic/aperiodic check, in I-channel units."""

    level: float = 0.15
    amplitude: float = 0.05
    drive_period: float = 25.0
    # same size as the encode_window patch
    lattice: int = 3
    constant_max_period: int = 50
    driven_max_period: int = 500
    tol: float = 1e-6
    window: int = 200

    def constant(self, n: int) -> np.ndarray:
        return np.full(n, self.level)

    def driven(self, n: int) -> np.ndarray:
        return self.level + self.amplitude * np.sin(2 * np.pi * np.arange(n) / self.drive_period)


@dataclass(frozen=True)
class DichotomyResult:
    constant_period: int | None
    driven_period: int | None

    @property
    def passed(self) -> bool:
        return self.constant_period is not None and self.driven_period is None


def check_dichotomy(params: CcnnParams, n_steps: int = 2000, probe: DichotomyProbe | None = None) -> DichotomyResult:
    probe = probe or DichotomyProbe()
    shape = (probe.lattice, probe.lattice)

    def trajectory(i_series):
        return run_lattice(params, (params.stimulus(v) for v in i_series), shape)

    const = detect_period(trajectory(probe.constant(n_steps)), probe.constant_max_period, probe.tol, probe.window)
    driven = detect_period(trajectory(probe.driven(n_steps)), probe.driven_max_period, probe.tol, probe.window)
    return DichotomyResult(const, driven)


def calibrate_dichotomy(
    params_grid: Iterable[CcnnParams],
    n_steps: int = 2000,
    probe: DichotomyProbe | None = None,
    accept: Callable[[CcnnParams], bool] | None = None,
) -> CcnnParams:
    """Return the first grid point that is periodic under constant drive and
    aperiodic under sinusoidal drive.

    ``accept`` is an optional extra gate, evaluated before the (slower)
    long runs, e.g. a check on short-window ROI behaviour.
    """
    if n_steps < 1000:
        raise InvalidInput("calibration needs n_steps >= 1000")
    probe = probe or DichotomyProbe()
    for k, params in enumerate(params_grid):
        if accept is not None and not accept(params):
            continue
        result = check_dichotomy(params, n_steps, probe)
        logger.debug("grid point %d: constant period %s, driven period %s", k, result.constant_period, result.driven_period)
        if result.passed:
            logger.info("grid point %d selected; constant-input period %d", k, result.constant_period)
            return params
    raise NoParamsFound("no grid point is periodic under constant input and aperiodic under sinusoidal input")
