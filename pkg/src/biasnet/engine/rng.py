"""Counter-based random streams.

Every stochastic unit of work (a prior draw, a chain, a tree) gets its own
generator derived from ``SeedSequence([master_seed, index])``, so results do not
depend on how work is scheduled across workers.
"""

from dataclasses import dataclass

import numpy as np


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Generator for work item ``index`` under ``master_seed``."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, index]))


@dataclass(frozen=True)
class DrawStreams:
    """Independent generators for one training draw.

      draw
        ├── prior
        └── chains
              ├── undichotomized
              └── dichotomized
    """

    prior: np.random.Generator
    chain_undichotomized: np.random.Generator
    chain_dichotomized: np.random.Generator

    def chain(self, dichotomized: bool) -> np.random.Generator:
        return self.chain_dichotomized if dichotomized else self.chain_undichotomized


def make_draw_streams(master_seed: int, draw_id: int) -> DrawStreams:
    root = np.random.SeedSequence([master_seed, draw_id])
    ss_prior, ss_chains = root.spawn(2)
    ss_undich, ss_dich = ss_chains.spawn(2)
    return DrawStreams(
        prior=np.random.default_rng(ss_prior),
        chain_undichotomized=np.random.default_rng(ss_undich),
        chain_dichotomized=np.random.default_rng(ss_dich),
    )


def derive_seed(master_seed: int, *path: int) -> int:
    """Stable 63-bit integer seed for a named sub-task (e.g. a forest)."""
    state = np.random.SeedSequence([master_seed, *path]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
