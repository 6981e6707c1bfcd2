"""Exception types shared across the package."""


class FewphotonError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FewphotonError):
    """A system or job configuration is malformed or inconsistent."""


class DefectiveHamiltonian(FewphotonError):
    """The effective Hamiltonian is not diagonalizable (or numerically
    indistinguishable from a non-diagonalizable one).

    Raised either from an eigendecomposition whose condition number or
    reconstruction residual exceeds the trusted range, or from a builder
    that recognizes parameters sitting on the known critical manifold of
    the collocated-pair model.
    """


class NonFinite(FewphotonError):
    """A propagator denominator collapsed under a weight that does not
    vanish, so the amplitude is genuinely singular at the requested point."""


class InstabilityDetected(FewphotonError):
    """The pole-averaged amplitude failed its shift-halving consistency
    check; the result cannot be trusted at the requested momenta."""


class GridTooCoarse(FewphotonError):
    """An output grid does not resolve the narrowest wavepacket."""
