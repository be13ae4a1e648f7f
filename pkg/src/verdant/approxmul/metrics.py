"""Exhaustive error characterization of approximate multipliers."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from verdant.approxmul.netlist import Netlist, simulate_batch
from verdant.errors import UnsupportedError

MAX_EXHAUSTIVE_BITWIDTH = 12
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ErrorMetrics:
    med: float   # mean |approx - exact|
    mred: float  # mean |approx - exact| / max(1, exact)
    er: float    # fraction of pairs with a nonzero error
    wce: int     # max |approx - exact|

    @property
    def is_exact(self) -> bool:
        return self.wce == 0

    def as_dict(self) -> dict:
        return asdict(self)


EXACT = ErrorMetrics(0.0, 0.0, 0.0, 0)


def error_metrics(netlist: Netlist) -> ErrorMetrics:
    """MED, MRED, ER and WCE over all ``2^(2B)`` operand pairs.

    Sums are exact (integer totals, ``math.fsum`` for the relative term) so
    the result does not depend on chunking or evaluation order.
    """
    B = netlist.bitwidth
    if B > MAX_EXHAUSTIVE_BITWIDTH:
        raise UnsupportedError(
            f"exhaustive characterization supports bitwidth <= {MAX_EXHAUSTIVE_BITWIDTH}, got {B}"
        )
    n = 1 << B
    total = n * n
    abs_sum = 0
    n_err = 0
    wce = 0
    rel_parts = []
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        a, b = idx % n, idx // n
        exact = a * b
        err = np.abs(simulate_batch(netlist, a, b) - exact)
        abs_sum += int(err.sum())
        n_err += int(np.count_nonzero(err))
        wce = max(wce, int(err.max()))
        rel_parts.append(err / np.maximum(exact, 1))
    mred = math.fsum(itertools.chain.from_iterable(p.tolist() for p in rel_parts)) / total
    return ErrorMetrics(med=abs_sum / total, mred=mred, er=n_err / total, wce=wce)
