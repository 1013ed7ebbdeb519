from functools import lru_cache

from hypothesis import HealthCheck, settings

from supercohom.algebra import build
from supercohom.detecting import assemble_detecting

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@lru_cache(maxsize=None)
def algebra(family, params):
    return build(family, params)


@lru_cache(maxsize=None)
def detecting(family, params, which="E"):
    return assemble_detecting(algebra(family, params), which)
