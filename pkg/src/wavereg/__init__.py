"""Internal-model based output regulation for a boundary-controlled wave
equation on an annulus: spectral plant discretization, controller synthesis,
closed-loop simulation and error-bound verification."""

__version__ = "0.1.0"
