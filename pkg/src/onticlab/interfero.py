"""Mach-Zehnder scenarios: the balanced interferometer and the BS3 variant.

Mode ordering is (a0, a1) for the plain interferometer and (a0, a1, v) with
BS3, where v is the unused input port of BS3 whose output feeds detector B0.
The phase shifter sits in path a1, before BS3.  Internal path phases are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .numerics import DEFAULT_TOL, matrix, vector
from .scenario import Measurement, QuantumScenario, ZeroStructure, zero_structure

PHASES = {"phi=0": 0.0, "phi=pi": math.pi}
SQRT_HALF = 1 / math.sqrt(2)


def beamsplitter_matrix(reflect: float = SQRT_HALF, transmit: float = SQRT_HALF) -> np.ndarray:
    """[[t, r], [-r, t]]; the 50:50 case is (1/sqrt2)[[1, 1], [-1, 1]]."""
    return matrix([[transmit, reflect], [-reflect, transmit]])


@dataclass(frozen=True)
class MziConfig:
    alpha: float = SQRT_HALF
    beta: float = SQRT_HALF
    phase: float = 0.0
    with_bs3: bool = False
    transmissivity: float | None = None

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if a < 0 or b <= 0 or abs(a * a + b * b - 1) > DEFAULT_TOL.norm * 10:
            raise InvalidConfig(f"need alpha >= 0, beta > 0, alpha^2 + beta^2 = 1 (got {a}, {b})")
        if self.phase not in (0.0, math.pi):
            raise InvalidConfig("phase must be 0 or pi")
        if self.with_bs3:
            t = self.transmissivity
            if t is None or not 0 <= t <= 1:
                raise InvalidConfig("BS3 needs a transmissivity in [0, 1]")
            if a > b + 1e-12:
                raise InvalidConfig("BS3 equalization needs alpha <= beta")
            if abs(math.sqrt(t) * b - a) > 1e-12:
                raise InvalidConfig("BS3 transmissivity must satisfy sqrt(T) * beta = alpha")
        elif self.transmissivity is not None:
            raise InvalidConfig("transmissivity given without BS3")

    @classmethod
    def figure(cls, fig: int, alpha2: float = 0.2, phase: float = 0.0) -> "MziConfig":
        """Figures 1/2 are the balanced interferometer, 3/4 the BS3 variant."""
        if fig in (1, 2):
            return cls(phase=phase)
        if fig in (3, 4):
            if not 0 <= alpha2 <= 0.5:
                raise InvalidConfig("the BS3 variant needs 0 <= alpha^2 <= 1/2")
            alpha, beta = math.sqrt(alpha2), math.sqrt(1 - alpha2)
            return cls(alpha, beta, phase, True, alpha2 / (1 - alpha2))
        raise InvalidConfig(f"unknown figure {fig}")

    @property
    def dim(self) -> int:
        return 3 if self.with_bs3 else 2

    @property
    def outcomes(self) -> tuple[str, ...]:
        return ("B0", "B1", "B2") if self.with_bs3 else ("B1", "B2")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "phase": "pi" if self.phase else "0",
            "with_bs3": self.with_bs3,
            "transmissivity": self.transmissivity,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MziConfig":
        phase = doc.get("phase", 0.0)
        phase = math.pi if phase in ("pi", math.pi) else 0.0
        try:
            return cls(
                float(doc.get("alpha", SQRT_HALF)),
                float(doc.get("beta", SQRT_HALF)),
                phase,
                bool(doc.get("with_bs3", False)),
                doc.get("transmissivity"),
            )
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(str(exc)) from exc


def phase_shifter(config: MziConfig, phase: float) -> np.ndarray:
    d = np.ones(config.dim, dtype=np.complex128)
    d[1] = np.exp(1j * phase)
    d[1] = complex(round(d[1].real), round(d[1].imag))  # 0 and pi are exact
    return matrix(np.diag(d))


def detector_unitary(config: MziConfig) -> np.ndarray:
    """Maps the state in front of BS2/BS3 to detector coordinates.

    BS2 sends a0 -> (b1 + b2)/sqrt2 and a1 -> (b1 - b2)/sqrt2; rows are ordered
    (b1, b2), or (b0, b1, b2) with BS3.
    """
    s = SQRT_HALF
    if not config.with_bs3:
        return matrix([[s, s], [s, -s]])
    t = config.transmissivity
    rt, rr = math.sqrt(t), math.sqrt(1 - t)
    bs3 = np.array([[1, 0, 0], [0, rt, -rr], [0, rr, rt]], dtype=np.complex128)  # (a0, a1', b0)
    bs2 = np.array([[0, 0, 1], [s, s, 0], [s, -s, 0]], dtype=np.complex128)  # -> (b0, b1, b2)
    return matrix(bs2 @ bs3)


def preparations(config: MziConfig) -> dict[str, np.ndarray]:
    psi = np.zeros(config.dim, dtype=np.complex128)
    psi[:2] = beamsplitter_matrix(config.alpha, config.beta) @ np.array([0.0, 1.0])  # BS1 on |s1>

    phi = np.zeros(config.dim, dtype=np.complex128)
    phi[0] = 1.0
    return {"psi": vector(psi), "phi": vector(phi)}


def build_mzi(config: MziConfig) -> QuantumScenario:
    """Scenario with preparations psi (source through BS1) and phi = |a0>."""
    det = detector_unitary(config)
    basis = tuple(det.conj()[k] for k in range(config.dim))
    return QuantumScenario(
        dim=config.dim,
        preparations=preparations(config),
        families={"phase": {mid: phase_shifter(config, ph) for mid, ph in PHASES.items()}},
        measurements={"detectors": Measurement(config.outcomes, basis)},
    )


def output_state(config: MziConfig, preparation: str, phase: float) -> np.ndarray:
    """Amplitudes at the detectors, in the detector ordering of ``config.outcomes``."""
    return detector_unitary(config) @ phase_shifter(config, phase) @ preparations(config)[preparation]


def mzi_zero_table(config: MziConfig) -> ZeroStructure:
    return zero_structure(build_mzi(config))
