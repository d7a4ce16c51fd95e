"""Exception and warning classes raised by gossip_realize."""


class GossipError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(GossipError, ValueError):
    """Malformed network topology (self-loop, duplicate edge, bad agent id)."""


class CycleExplosion(GossipError):
    """Cycle enumeration exceeded the configured cap."""

    def __init__(self, cap):
        super().__init__(f"more than {cap} directed cycles; raise the cap or use a smaller graph")
        self.cap = cap


class PartitionError(GossipError, ValueError):
    """Index partition does not cover {1..nm} disjointly."""


class RealizationError(GossipError):
    """Local stochastic matrices could not be constructed."""


class PreconditionError(RealizationError):
    """Topology or partition fails the requirements of the construction."""


class RatioViolation(RealizationError, ValueError):
    """beta1/beta2 does not match the weight ratio of the coupled entries."""


class IndexCollision(RealizationError, ValueError):
    """A rate matrix was requested for a single global index."""


class PermutationFixesWeight(RealizationError):
    """A permutation block leaves the induced weight subvector unchanged."""


class NoPermutationPlacement(RealizationError):
    """pi0 is non-empty but no edge can carry a permutation block."""


class UnknownEdge(GossipError, KeyError):
    """Edge is not part of the network / matrix set."""

    def __str__(self):
        return Exception.__str__(self)


class ConfigError(GossipError):
    """Invalid problem configuration; ``errors`` lists field-level diagnostics."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class MatrixFileError(ConfigError):
    """A matrix file is unreadable or does not match the configuration."""


class NoCouplingWarning(UserWarning):
    """An edge received no rate-matrix factor and no permutation block."""
