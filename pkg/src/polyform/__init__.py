"""Spinorial exterior forms: Kahler-Atiyah algebra, real Clifford modules,
algebraic Spin(7) structures, Lorentzian parabolic pairs and left-invariant
parallel spinor flows."""

__version__ = "0.1.0"

from .kahler import (
    Multivector,
    QuadraticSpace,
    contract,
    det_inner,
    geometric_product,
    hodge,
    ka_trace,
    pi,
    tau,
    tau_hat,
    wedge,
)

__all__ = [
    "Multivector",
    "QuadraticSpace",
    "contract",
    "det_inner",
    "geometric_product",
    "hodge",
    "ka_trace",
    "pi",
    "tau",
    "tau_hat",
    "wedge",
]
