"""Lumped-element circuit to effective lattice-model parameters.

Maps a chain of LC resonators coupled through Josephson junctions
(capacitance ``C_J``, Josephson energy ``E_J``) onto the driven-dissipative
Kerr lattice: resonance frequency, participation ratio alpha, the linear
coupling amplitudes X_plus / X_minus, and the effective interaction
strengths U (on-site Kerr), V (cross-Kerr) and t_ch (correlated hopping).

Inputs are SI (farad, henry, joule); derived energies are reported as
ordinary frequencies in Hz (divided by the Planck constant) and the
resonance as an angular frequency in rad/s.

Sign convention: the junction nonlinearity makes the derived U and V
*negative* (attractive).  Phase-diagram work in this package uses positive
U, V throughout, so mapped values must be sign-flipped consciously; the
command line refuses to emit model parameters until the caller
acknowledges this.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import e as _ELEMENTARY_CHARGE
from scipy.constants import h as _PLANCK
from scipy.constants import hbar as _HBAR

from .errors import ConfigError

__all__ = [
    "CancellationTarget",
    "CircuitDerived",
    "CircuitParams",
    "FLUX_QUANTUM_REDUCED",
    "derive",
    "solve_cancellation",
]

#: Reduced magnetic flux quantum hbar / (2e), in weber.
FLUX_QUANTUM_REDUCED = _HBAR / (2.0 * _ELEMENTARY_CHARGE)

SIGN_NOTE = (
    "derived U and V are negative (attractive junction nonlinearity); "
    "phase-diagram conventions in this package use positive U, V"
)
CHARGING_NOTE = (
    "E_C uses the standard charging energy e^2/(2*C_tilde); an alternative "
    "form with C_tilde squared is dimensionally inconsistent and is not used"
)


class CancellationTarget(enum.Enum):
    """Which junction parameter to solve for when zeroing X_minus."""

    E_J = "E_J"
    C_J = "C_J"


@dataclass(frozen=True)
class CircuitParams:
    """Lumped-element parameters of one lattice site and its junctions (SI)."""

    C: float        # resonator capacitance [F]
    L: float        # resonator inductance [H]
    C_J: float      # junction capacitance [F]
    E_J: float      # Josephson energy [J]
    z: int = 2      # lattice coordination number

    def __post_init__(self) -> None:
        for name in ("C", "L", "C_J", "E_J"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not (isinstance(self.z, (int, np.integer)) and self.z >= 1):
            raise ConfigError("z must be a positive integer")


@dataclass(frozen=True)
class CircuitDerived:
    """Effective-model quantities computed from a circuit.

    ``omega`` is the angular resonance frequency in rad/s; ``E_C``, ``U``,
    ``V`` and ``t_ch`` are energies expressed in Hz.  ``X_minus`` is the
    residual linear coupling; it is reported as-is and never assumed zero.
    """

    C_tilde: float
    L_tilde: float
    L_J: float
    omega: float
    alpha: float
    X_plus: float
    X_minus: float
    E_C: float
    U: float
    V: float
    t_ch: float
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ConfigError("derived omega must be positive")

    @property
    def frequency(self) -> float:
        """Resonance frequency omega / 2 pi in Hz."""
        return self.omega / (2.0 * np.pi)


def derive(circuit: CircuitParams) -> CircuitDerived:
    """All derived quantities of the effective lattice model.

    The renormalized single-site elements are C_tilde = C + 2 C_J and
    1/L_tilde = 1/(2L) + 1/L_J with the junction inductance
    L_J = phi_0^2 / E_J.  The participation ratio alpha = C_J / C_tilde
    controls every nonlinear coupling:

        U = -alpha z E_C / 2,   V = -2 alpha E_C,   t_ch = alpha E_C,

    so z V / U = 4 identically.  To keep that identity exact in floating
    point, all three are derived from the single product alpha * E_C.
    """
    c_tilde = circuit.C + 2.0 * circuit.C_J
    l_j = FLUX_QUANTUM_REDUCED**2 / circuit.E_J
    l_tilde = 1.0 / (1.0 / (2.0 * circuit.L) + 1.0 / l_j)
    omega = 1.0 / np.sqrt(l_tilde * c_tilde)
    alpha = circuit.C_J / c_tilde
    inductive = 2.0 * circuit.L / (2.0 * circuit.L + l_j)
    x_plus = inductive + alpha
    x_minus = inductive - alpha
    e_c = _ELEMENTARY_CHARGE**2 / (2.0 * c_tilde) / _PLANCK

    base = alpha * e_c
    u = -(circuit.z * base) / 2.0
    v = -2.0 * base
    t_ch = base

    notes = [SIGN_NOTE, CHARGING_NOTE]
    if circuit.C_J / circuit.C >= 0.1:
        notes.append(
            f"C_J/C = {circuit.C_J / circuit.C:.3g} is not small; the "
            "effective-model expansion assumes C_J/C << 1"
        )
    if x_plus >= 0.5:
        notes.append(
            f"X_plus = {x_plus:.3g} is not far below 2; the rotating-wave "
            "treatment of the linear coupling degrades"
        )

    return CircuitDerived(
        C_tilde=c_tilde,
        L_tilde=l_tilde,
        L_J=l_j,
        omega=float(omega),
        alpha=alpha,
        X_plus=x_plus,
        X_minus=x_minus,
        E_C=e_c,
        U=u,
        V=v,
        t_ch=t_ch,
        notes=tuple(notes),
    )


def solve_cancellation(
    C: float,
    L: float,
    z: int,
    target: CancellationTarget,
    *,
    C_J: float | None = None,
    E_J: float | None = None,
) -> CircuitParams:
    """Circuit with the residual linear coupling X_minus tuned to zero.

    The cancellation condition is C_J/(C + 2 C_J) = 2L/(2L + L_J) = alpha.
    Exactly one junction parameter is solved for (``target``); the other
    must be supplied as a keyword and stays fixed.
    """
    if target is CancellationTarget.E_J:
        if C_J is None or E_J is not None:
            raise ConfigError("target E_J requires C_J fixed and E_J unset")
        if C_J <= 0:
            raise ConfigError("C_J must be positive")
        alpha = C_J / (C + 2.0 * C_J)
        l_j = 2.0 * L * (1.0 - alpha) / alpha
        return CircuitParams(
            C=C, L=L, C_J=C_J, E_J=FLUX_QUANTUM_REDUCED**2 / l_j, z=z
        )

    if E_J is None or C_J is not None:
        raise ConfigError("target C_J requires E_J fixed and C_J unset")
    if E_J <= 0:
        raise ConfigError("E_J must be positive")
    l_j = FLUX_QUANTUM_REDUCED**2 / E_J
    alpha = 2.0 * L / (2.0 * L + l_j)
    if alpha >= 0.5:
        raise ConfigError(
            "no positive C_J can cancel X_minus: the inductive ratio "
            f"2L/(2L+L_J) = {alpha:.6g} must stay below 1/2 "
            "(the junction inductance must exceed 2L)"
        )
    return CircuitParams(C=C, L=L, C_J=alpha * C / (1.0 - 2.0 * alpha), E_J=E_J, z=z)
