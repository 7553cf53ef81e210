"""Numerical laboratory for quenched central limit theorems of stationary
Markov chains and the intermittent maps they model."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

from . import counterexample, finite_chain, intermittent, probkit, quenched_mc  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .finite_chain import FiniteChain, eta_exact  # noqa: E402,F401
from .intermittent import GammaMap, ObservableSpec, UlamModel, ulam_build  # noqa: E402,F401
from .quenched_mc import run_replicas, quenched_clt_report  # noqa: E402,F401

__all__ = ["__version__", "counterexample", "finite_chain", "intermittent", "probkit", "quenched_mc",
           "FiniteChain", "eta_exact", "GammaMap", "ObservableSpec", "UlamModel", "ulam_build",
           "run_replicas", "quenched_clt_report"]
