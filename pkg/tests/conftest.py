import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from majdyn.graph import gen_random_odd_graph

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def odd_graphs(draw, min_n=3, max_n=25, d_choices=(3, 5, 7)):
    n = draw(st.integers(min_n, max_n))
    d_max = draw(st.sampled_from(d_choices))
    seed = draw(st.integers(0, 2**32 - 1))
    return gen_random_odd_graph(n, d_max, np.random.default_rng(seed))


@st.composite
def graph_and_config(draw, **kw):
    g = draw(odd_graphs(**kw))
    bits = draw(st.lists(st.sampled_from([-1, 1]), min_size=g.n, max_size=g.n))
    return g, np.array(bits, dtype=np.int8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
