"""Lower-central-series and derived-series extensions of elementary abelian
modules by finite solvable groups given by polycyclic presentations."""

__version__ = "0.1.0"
