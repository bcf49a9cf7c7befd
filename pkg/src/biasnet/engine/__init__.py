"""Biased net events, update probabilities and the Markov chain sampler."""

from biasnet.engine.events import event_counts, update_probability
from biasnet.engine.illposed import illposed_marginals
from biasnet.engine.models import PARAM_NAMES, EventCounts, ModelSpec, ParamVector
from biasnet.engine.rng import DrawStreams, derive_seed, make_draw_streams, substream
from biasnet.engine.sampler import burnin_steps, decode_pair, sfbn_sample, sfbn_step

__all__ = [
    "PARAM_NAMES",
    "DrawStreams",
    "EventCounts",
    "ModelSpec",
    "ParamVector",
    "burnin_steps",
    "decode_pair",
    "derive_seed",
    "event_counts",
    "illposed_marginals",
    "make_draw_streams",
    "sfbn_sample",
    "sfbn_step",
    "substream",
    "update_probability",
]
