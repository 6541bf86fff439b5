"""Environment pairs used throughout the examples and tests."""
from __future__ import annotations

from .env_model import EnvPair, Environment, validate_pair


def switched_env(rho: float) -> Environment:
    return Environment(a=3.0, b=3.0, c=4.0, d=rho, alpha=5.0, beta=1.0)


def top_pair(rho: float = 5.5) -> EnvPair:
    env0 = Environment(a=1.0, b=1.0, c=2.0, d=2.0, alpha=1.0, beta=5.0)
    return validate_pair(env0, switched_env(rho))


def bottom_pair(rho: float = 6.8) -> EnvPair:
    env0 = Environment(a=1.0, b=2.0 / 3.0, c=2.0, d=4.0 / 3.0, alpha=1.0, beta=2.0)
    return validate_pair(env0, switched_env(rho))


def identical_pair() -> EnvPair:
    env = Environment(a=1.0, b=1.0, c=2.0, d=2.0, alpha=1.0, beta=1.0)
    return validate_pair(env, env)
