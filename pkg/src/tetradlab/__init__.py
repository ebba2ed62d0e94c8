"""tetradlab: orthonormal-coframe geometry in the Clifford algebra Cl(1,3)."""

__version__ = "0.1.0"
