"""Shared fixtures: the full simulation preset (built once per session), a
small cheap plant for structural tests, and handcrafted scalar toys."""

import numpy as np
import pytest

from wavereg.exosystem import Exosystem, SignalSpec, SignalTerm, build_exosystem, build_sect5_exosystem
from wavereg.loop import assemble_direct
from wavereg.plant import FourierOutputBasis, ModalWavePlant, assemble_wave_plant
from wavereg.synthesis import solve_regulator, synth_approx_robust


@pytest.fixture(scope="session")
def sect5_plant():
    return assemble_wave_plant(8, 12, 3.0)


@pytest.fixture(scope="session")
def sect5_exo():
    return build_sect5_exosystem(11)


@pytest.fixture(scope="session")
def approx5(sect5_plant, sect5_exo):
    return synth_approx_robust(sect5_plant, sect5_exo, 5, 0.15)


@pytest.fixture(scope="session")
def sect5_loop(sect5_plant, approx5, sect5_exo):
    return assemble_direct(sect5_plant, approx5, sect5_exo)


@pytest.fixture(scope="session")
def sect5_reg(sect5_loop, sect5_exo):
    return solve_regulator(sect5_loop, sect5_exo)


@pytest.fixture(scope="session")
def small_plant():
    # 3 radial modes, angular orders 0..3: 21 oscillators, 7 outputs.
    return assemble_wave_plant(3, 4, 3.0)


@pytest.fixture(scope="session")
def small_exo(small_plant):
    reference = SignalSpec([SignalTerm(np.cos, "sin", np.pi)])
    disturbance = SignalSpec([SignalTerm(np.sin, "sin", 2.0 * np.pi)])
    return build_exosystem(reference, disturbance, small_plant.basis.max_order)


def scalar_plant(a=-1.0, b=1.0, c=1.0):
    """Single-state plant with As = a, B = b, C = c and no wave structure."""
    A = np.array([[a]])
    return ModalWavePlant(
        modes=(),
        basis=FourierOutputBasis(0),
        A=A,
        B=np.array([[b]]),
        C=np.array([[c]]),
        As=A.copy(),
        Q_feedback=0.0,
        energy_weights=np.ones(1),
        rho=1.0,
        T_mod=1.0,
    )


@pytest.fixture
def toy_plant():
    return scalar_plant()


def single_freq_exo(omega, e=0.0, f=-1.0, dim_y=1):
    E = np.zeros((dim_y, 1), dtype=complex)
    F = np.zeros((dim_y, 1), dtype=complex)
    E[0, 0] = e
    F[0, 0] = f
    return Exosystem(
        omegas=np.array([float(omega)]), E=E, F=F, v0=np.ones(1, dtype=complex)
    )
