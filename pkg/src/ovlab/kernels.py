"""Backend selection for the embedding search.

The compiled engine is used when the extension imports and OVLAB_BACKEND is
not set to ``python``.  Both engines take the same plan and target and return
identical results; targets too large for the dense tables fall back to the
pure-Python engine.
"""
import os

from . import _search

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "python"
if _compiled is not None and os.environ.get("OVLAB_BACKEND", "").lower() != "python":
    BACKEND = "compiled"


def available():
    return ["python"] + (["compiled"] if _compiled is not None else [])


def search(H, G, limit=0, collect=False, backend=None):
    """Run the backtracker; maps come back indexed by H's vertices."""
    backend = backend or BACKEND
    plan = _search.plan_for(H)
    target = _search.target_for(G)
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend not available")
        try:
            count, raw = _compiled.search(plan, target, limit, collect)
        except ValueError:
            count, raw = _search.search(plan, target, limit, collect)
    else:
        count, raw = _search.search(plan, target, limit, collect)
    if not collect:
        return count, None
    order = plan.order
    maps = []
    for m in raw:
        out = [0] * plan.nh
        for d, v in enumerate(order):
            out[v - 1] = m[d]
        maps.append(tuple(out))
    return count, maps
