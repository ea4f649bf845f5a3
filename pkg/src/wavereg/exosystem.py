"""Finite-dimensional signal generator producing references and disturbances.

The generator state obeys v' = S v with S = diag(i w_1, ..., i w_q) and feeds
the plant through w(t) = E v(t) (boundary disturbance) and y_ref(t) = -F v(t)
(boundary reference), both expressed as Fourier coefficients on the output
basis. Real harmonic signals a(theta) sin(w t) + b(theta) cos(w t) are
expanded over conjugate frequency pairs so that E v and F v stay real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plant import project_profile

_DEFAULT_GRID = 4096


@dataclass(frozen=True)
class SignalTerm:
    """One separable term profile(theta) * {sin, cos}(omega t)."""

    profile: object
    temporal: str
    omega: float

    def __post_init__(self):
        if self.temporal not in ("sin", "cos"):
            raise ValueError("temporal factor must be 'sin' or 'cos'")
        if self.temporal == "sin" and self.omega == 0.0:
            raise ValueError("sin term with omega = 0 is identically zero")

    def sampled(self, grid_size):
        theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
        if callable(self.profile):
            return np.asarray(self.profile(theta), dtype=float)
        samples = np.asarray(self.profile, dtype=float)
        if samples.size != grid_size:
            raise ValueError("sampled profile does not match the projection grid")
        return samples


@dataclass(frozen=True)
class SignalSpec:
    """A finite sum of harmonic terms describing one boundary signal."""

    terms: tuple

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))

    def frequencies(self):
        out = set()
        for term in self.terms:
            out.add(term.omega)
            out.add(-term.omega)
        return out


@dataclass(frozen=True)
class Exosystem:
    """Diagonal exosystem (omegas, E, F, v0) on W = C^q."""

    omegas: np.ndarray
    E: np.ndarray
    F: np.ndarray
    v0: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.ndim != 1 or om.size == 0:
            raise ValueError("omegas must be a nonempty vector")
        if np.unique(om).size != om.size:
            raise ValueError("exosystem frequencies must be distinct")
        q = om.size
        for name, M in (("E", self.E), ("F", self.F)):
            if M.ndim != 2 or M.shape[1] != q:
                raise ValueError(f"{name} must have {q} columns")
        if self.v0.shape != (q,):
            raise ValueError(f"v0 must have shape ({q},)")

    @property
    def q(self):
        return self.omegas.size

    @property
    def S(self):
        return np.diag(1j * self.omegas)

    def is_conjugate_symmetric(self, tol=1e-12):
        """True if frequencies pair as +-w with conjugate columns and v0,
        which makes E v(t) and F v(t) real for all t."""
        order = {w: k for k, w in enumerate(self.omegas)}
        for k, w in enumerate(self.omegas):
            if -w not in order:
                return False
            j = order[-w]
            ok = (
                np.allclose(self.E[:, k], self.E[:, j].conj(), atol=tol)
                and np.allclose(self.F[:, k], self.F[:, j].conj(), atol=tol)
                and abs(self.v0[k] - self.v0[j].conj()) <= tol
            )
            if not ok:
                return False
        return True


def v_at(exo, t):
    """Exosystem state v(t) = exp(i omega_k t) v0_k, componentwise."""
    return np.exp(1j * exo.omegas * t) * exo.v0


def signals_at(exo, t):
    """Disturbance and reference coefficients (w, y_ref) at time ``t``."""
    v = v_at(exo, t)
    return exo.E @ v, -(exo.F @ v)


def build_exosystem(reference, disturbance, max_order, grid_size=_DEFAULT_GRID, v0=None):
    """Assemble the exosystem generating the given reference and disturbance.

    Each harmonic term is projected onto the Fourier output basis of order
    ``max_order`` and expanded over the conjugate frequency pair via
    sin(wt) = (e^{iwt} - e^{-iwt}) / 2i and cos(wt) = (e^{iwt} + e^{-iwt}) / 2.

    Parameters
    ----------
    reference, disturbance : SignalSpec
        The tracked signal y_ref and the boundary disturbance d.
    max_order : int
        Angular cutoff of the output basis the signals are projected on.
    grid_size : int
        Uniform angular grid used for the projections.
    v0 : array_like, optional
        Initial exosystem state; defaults to the all-ones vector, for which
        the constructed E and F reproduce the requested signals exactly.
    """
    freqs = sorted(reference.frequencies() | disturbance.frequencies())
    omegas = np.array(freqs, dtype=float)
    index = {w: k for k, w in enumerate(freqs)}
    dim_y = 2 * max_order + 1
    q = omegas.size

    def accumulate(spec):
        M = np.zeros((dim_y, q), dtype=complex)
        for term in spec.terms:
            coeffs = project_profile(term.sampled(grid_size), max_order)
            if term.temporal == "sin":
                M[:, index[term.omega]] += -0.5j * coeffs
                M[:, index[-term.omega]] += 0.5j * coeffs
            else:
                M[:, index[term.omega]] += 0.5 * coeffs
                M[:, index[-term.omega]] += 0.5 * coeffs
        return M

    E = accumulate(disturbance)
    F = -accumulate(reference)
    if v0 is None:
        v0 = np.ones(q, dtype=complex)
    return Exosystem(omegas=omegas, E=E, F=F, v0=np.asarray(v0, dtype=complex))


def build_sect5_exosystem(max_order, grid_size=_DEFAULT_GRID):
    """Exosystem for the annulus experiment signals.

    Generates the reference
    y_ref = -(1/(2 pi^2)) (pi - theta)^2 sin(pi t) - (1/2) sin(theta/2) cos(2 pi t)
    and the disturbance d = cos(theta) sin(2 pi t) + sin(theta) sin(pi t) over
    the frequencies (-2 pi, -pi, pi, 2 pi) with v0 = (1, 1, 1, 1).

    Requires ``max_order >= 5`` so the non-smooth profiles are resolved.
    """
    if max_order < 5:
        raise ValueError("max_order must be at least 5 for the preset signals")
    reference = SignalSpec(
        [
            SignalTerm(lambda th: -((np.pi - th) ** 2) / (2.0 * np.pi**2), "sin", np.pi),
            SignalTerm(lambda th: -0.5 * np.sin(th / 2.0), "cos", 2.0 * np.pi),
        ]
    )
    disturbance = SignalSpec(
        [
            SignalTerm(np.cos, "sin", 2.0 * np.pi),
            SignalTerm(np.sin, "sin", np.pi),
        ]
    )
    return build_exosystem(reference, disturbance, max_order, grid_size=grid_size)
