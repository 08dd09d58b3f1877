"""Hypothesis strategies for particles and particle sets."""

from hypothesis import strategies as st

from flbot.concepts import BOT_HEAD, Particle, constant, reduce

ROLES = ("r", "s")
CONSTANTS = ("A", "B")


def ground_particles(max_depth: int = 3):
    heads = st.sampled_from([BOT_HEAD] + [constant(c) for c in CONSTANTS])
    paths = st.lists(st.sampled_from(ROLES), max_size=max_depth).map(tuple)
    return st.builds(Particle, paths, heads)


def particle_sets(max_size: int = 5):
    return st.frozensets(ground_particles(), max_size=max_size)


def reduced_sets(max_size: int = 5):
    return particle_sets(max_size).map(reduce)
