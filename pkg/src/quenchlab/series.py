"""Partial-sum traces of nonnegative-ish series with a convergence verdict."""
from dataclasses import dataclass, field

import numpy as np

CONVERGENT_CERTIFIED = "convergent-certified"
CONVERGENT_EVIDENCE = "convergent-evidence"
DIVERGENT_EVIDENCE = "divergent-evidence"
INCONCLUSIVE = "inconclusive"

VERDICTS = (CONVERGENT_CERTIFIED, CONVERGENT_EVIDENCE, DIVERGENT_EVIDENCE, INCONCLUSIVE)


@dataclass
class SeriesReport:
    """Terms, running sums and verdict of a truncated series.

    ``tail_bound`` is only set when a certificate bounding the remainder
    after the last term was actually computed.  ``condition`` names the
    criterion the series evaluates (e.g. ``"hannan_heyde"``).
    """

    terms: np.ndarray
    partial_sums: np.ndarray
    verdict: str = INCONCLUSIVE
    tail_bound: float = None
    condition: str = None
    start_index: int = 0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @classmethod
    def from_terms(cls, terms, **kwargs):
        terms = np.asarray(terms, dtype=float)
        return cls(terms=terms, partial_sums=np.cumsum(terms), **kwargs)

    @property
    def total(self):
        return float(self.partial_sums[-1]) if len(self.partial_sums) else 0.0

    def indices(self):
        return np.arange(self.start_index, self.start_index + len(self.terms))

    def to_dict(self):
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "total": self.total,
            "tail_bound": self.tail_bound,
            "start_index": self.start_index,
            "terms": self.terms.tolist(),
            "partial_sums": self.partial_sums.tolist(),
            "info": _jsonable(self.info),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
