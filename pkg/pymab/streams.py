"""Labelled random streams derived from one master seed."""

import logging
from enum import IntEnum

import numpy as np

class Purpose(IntEnum):
    """What a stream's draws are used for."""

    ALLOCATE = 0
    REWARD = 1

class StreamFactory:
    """Spawns an independent numpy generator per (replication, week, policy, purpose).

    Every stream is keyed by its label rather than by creation order, so adding a
    policy or skipping a week never perturbs another stream's draws.

    Args:
        seed (int): The master seed (unsigned 64-bit).
        replication (int): Index of the replication this factory serves. Default 0.
    """

    def __init__(self, seed, replication=0):

        self._log = logging.getLogger(__name__)

        self.seed = seed
        self.replication = replication

    def stream(self, week, policy, purpose):
        """Return the generator for one labelled stream.

        Args:
            week (int): The 1-based week.
            policy (PolicyId): The policy drawing from the stream.
            purpose (Purpose): Allocation or reward draws.

        Returns:
            numpy.random.Generator: A freshly seeded generator; equal labels give equal draws.
        """

        sequence = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.replication, week, policy.index, int(purpose))
        )

        self._log.debug(
            "Spawned stream replication=%d week=%d policy=%s purpose=%s",
            self.replication, week, policy.token, purpose.name
        )

        return np.random.Generator(np.random.PCG64(sequence))
