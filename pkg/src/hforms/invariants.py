"""Levels, diagonal u-invariants and Waring numbers of finite fields."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from loguru import logger

from .config import SearchConfig, get_config
from .errors import HFormsError, SearchBudgetExceeded
from .gf import FieldDescriptor, dth_root_table, power_classes
from .isotropy import power_images, sumset
from .models import INF, InvariantReport, OrzechCheck

ORZECH_LIST = {(5, 4), (13, 4), (29, 4), (11, 5)}


@dataclass(frozen=True)
class PowerSumClosure:
    """First-reach depths of sums of nonzero d-th powers.

    ``depth[a]`` is the least number of nonzero d-th powers summing to ``a``
    (0 for a = 0, -1 when unreachable). ``parent[a]`` and ``step[a]`` record the
    predecessor value and the power added on a shortest path.
    """

    depth: np.ndarray
    parent: np.ndarray
    step: np.ndarray
    cost: int

    @property
    def closure(self) -> frozenset[int]:
        """k_d: the elements that are sums of d-th powers."""
        return frozenset(int(a) for a in np.flatnonzero(self.depth >= 0))

    def path(self, a: int) -> list[int]:
        """The d-th powers, in back-trace order, of a shortest representation of ``a``."""
        powers = []
        while self.depth[a] > 0:
            powers.append(int(self.step[a]))
            a = int(self.parent[a])
        return powers


@lru_cache(maxsize=None)
def power_sum_closure(F: FieldDescriptor, d: int) -> PowerSumClosure:
    """Breadth-first search over iterated sumsets of the nonzero d-th powers."""
    powers = power_images(F, d, 1)
    depth = np.full(F.q, -1, dtype=np.int64)
    parent = np.full(F.q, -1, dtype=np.int64)
    step = np.full(F.q, -1, dtype=np.int64)
    depth[0] = 0
    frontier = np.array([0], dtype=np.int64)
    level, cost = 0, 0
    while frontier.size:
        level += 1
        sums = F.add_array(frontier[:, None], powers[None, :]).ravel()
        origins = np.repeat(frontier, powers.size)
        added = np.tile(powers, frontier.size)
        cost += sums.size
        values, first = np.unique(sums, return_index=True)
        fresh = depth[values] < 0
        values, first = values[fresh], first[fresh]
        depth[values] = level
        parent[values] = origins[first]
        step[values] = added[first]
        frontier = values
    return PowerSumClosure(depth=depth, parent=parent, step=step, cost=cost)


def _roots(F: FieldDescriptor, d: int, powers: list[int]) -> list[int]:
    roots = dth_root_table(F, d)
    return sorted(roots[w] for w in powers)


def level(F: FieldDescriptor, d: int) -> InvariantReport:
    """s_d(F_q): the least s with -1 a sum of s d-th powers.

    The witness lists x_1, ..., x_s with x_1^d + ... + x_s^d = -1.
    """
    minus_one = F.neg(1)
    d_star = power_classes(F, d).d_star
    if d % 2 == 1:
        return InvariantReport(
            invariant="s_d", field=F.name, d=d, value=1, witness=[minus_one], bound_used=d_star
        )
    closure = power_sum_closure(F, d)
    s = int(closure.depth[minus_one])
    if s < 0:
        return InvariantReport(invariant="s_d", field=F.name, d=d, value=INF, search_cost=closure.cost)
    witness = _roots(F, d, closure.path(minus_one))
    logger.debug(f"s_{d}({F.name}) = {s} via {witness}")
    return InvariantReport(
        invariant="s_d",
        field=F.name,
        d=d,
        value=s,
        witness=witness,
        bound_used=d_star,
        search_cost=closure.cost,
    )


def waring_number(F: FieldDescriptor, d: int) -> InvariantReport:
    """Least n such that every sum of d-th powers is a sum of n d-th powers.

    The witness is an element needing the maximal number of powers together with
    such a representation.
    """
    closure = power_sum_closure(F, d)
    n = int(closure.depth.max())
    hardest = int(np.flatnonzero(closure.depth == n)[0])
    return InvariantReport(
        invariant="waring",
        field=F.name,
        d=d,
        value=n,
        witness=[hardest, _roots(F, d, closure.path(hardest))],
        bound_used=d,
        search_cost=closure.cost,
        details={"closure_size": len(closure.closure), "closure_is_field": len(closure.closure) == F.q},
    )


def sum_of_powers_decomposition(F: FieldDescriptor, d: int, a: int, s: int) -> list[int] | None:
    """x_1, ..., x_s with x_1^d + ... + x_s^d = a, or None when none exist."""
    if s < 1:
        raise HFormsError(f"Number of summands must be positive, got {s}")
    closure = power_sum_closure(F, d)
    need = int(closure.depth[a])
    if need < 0 or need > s:
        return None
    return [0] * (s - need) + _roots(F, d, closure.path(a))


@dataclass
class _ClassSearch:
    """Incremental anisotropy test over sequences of power-class representatives."""

    F: FieldDescriptor
    d: int
    config: SearchConfig

    def __post_init__(self):
        table = power_classes(self.F, self.d)
        self.reps = table.reps
        self.images = [power_images(self.F, self.d, r) for r in self.reps]
        self.with_zero = [np.concatenate(([0], im)) for im in self.images]
        self.negated = [self.F.neg_array(im) for im in self.images]
        self.cost = 0
        self.nodes = 0

    def extend(self, reach: np.ndarray, c: int) -> np.ndarray | None:
        """Represented values after appending class ``c``, or None if that creates a nonzero zero."""
        self.nodes += 1
        self.cost += int(reach.sum()) * (len(self.images[c]) + 1)
        if self.cost > self.config.budget_evals:
            raise SearchBudgetExceeded(f"class search over {self.F.name}", self.config.budget_evals)
        if reach[self.negated[c]].any():
            return None
        out, _ = sumset(self.F, reach, self.with_zero[c])
        return out

    def start(self) -> np.ndarray:
        reach = np.zeros(self.F.q, dtype=bool)
        reach[0] = True
        return reach


def u_diag(F: FieldDescriptor, d: int, config: SearchConfig | None = None) -> InvariantReport:
    """u_diag(d, F_q) by depth-first search over canonical diagonal forms.

    Forms are non-decreasing sequences of power-class indices starting with the
    class of 1 (scaling and Krull-Schmidt make this complete). Isotropic prefixes
    are pruned and the search stops at the Kneser bound gcd(d, q - 1).

    Raises:
        SearchBudgetExceeded: If the search outgrows ``budget_evals``.
    """
    config = config or get_config()
    search = _ClassSearch(F, d, config)
    bound = len(search.reps)
    best: list[int] = [0]

    def dfs(prefix: list[int], reach: np.ndarray) -> bool:
        nonlocal best
        if len(prefix) > len(best):
            best = list(prefix)
            if len(best) == bound:
                return True
        if len(prefix) == bound:
            return False
        for c in range(prefix[-1], bound):
            nxt = search.extend(reach, c)
            if nxt is not None and dfs(prefix + [c], nxt):
                return True
        return False

    dfs([0], search.extend(search.start(), 0))
    witness = [search.reps[c] for c in best]
    logger.info(f"u_diag({d}, {F.name}) = {len(best)} after {search.nodes} nodes")
    return InvariantReport(
        invariant="u_diag",
        field=F.name,
        d=d,
        value=len(best),
        witness=witness,
        bound_used=bound,
        search_cost=search.cost,
        details={"nodes": search.nodes},
    )


def check_orzech_dim3(F: FieldDescriptor, d: int, config: SearchConfig | None = None) -> OrzechCheck:
    """Search for an anisotropic diagonal form of dimension 3 and compare with Orzech's list."""
    config = config or get_config()
    search = _ClassSearch(F, d, config)
    bound = len(search.reps)
    witness = None
    first = search.extend(search.start(), 0)
    for i in range(bound):
        second = search.extend(first, i)
        if second is None:
            continue
        for j in range(i, bound):
            if search.extend(second, j) is not None:
                witness = [search.reps[0], search.reps[i], search.reps[j]]
                break
        if witness:
            break
    found = witness is not None
    listed = (F.q, d) in ORZECH_LIST if d <= 5 else None
    agrees = None if listed is None else listed == found
    if agrees is False:
        logger.warning(f"Dimension-3 search over {F.name}, d={d} disagrees with Orzech's list (found={found})")
    return OrzechCheck(field=F.name, d=d, found=found, witness=witness, listed=listed, agrees=agrees)


def universality_threshold(F: FieldDescriptor, d: int, config: SearchConfig | None = None) -> InvariantReport:
    """Least n such that every diagonal form of dimension >= n is universal.

    This bounds u_diag from above. When the sums of d-th powers do not fill F_q,
    no multiple of <1> is universal and the value is inf.
    """
    config = config or get_config()
    closure = power_sum_closure(F, d)
    if len(closure.closure) < F.q:
        return InvariantReport(invariant="universality_threshold", field=F.name, d=d, value=INF)
    search = _ClassSearch(F, d, config)
    bound = len(search.reps)
    # Pigeonhole: some class repeats waring-many times and c<1,...,1> is universal.
    ceiling = bound * (int(closure.depth.max()) - 1) + 1
    full = F.q

    def universal(reach: np.ndarray) -> bool:
        return int(reach.sum()) == full

    def has_non_universal(prefix: list[int], reach: np.ndarray, n: int) -> bool:
        if universal(reach):
            return False
        if len(prefix) == n:
            return True
        for c in range(prefix[-1], bound):
            search.nodes += 1
            search.cost += int(reach.sum()) * (len(search.images[c]) + 1)
            if search.cost > config.budget_evals:
                raise SearchBudgetExceeded(f"universality search over {F.name}", config.budget_evals)
            nxt, _ = sumset(F, reach, search.with_zero[c])
            if has_non_universal(prefix + [c], nxt, n):
                return True
        return False

    start, _ = sumset(F, search.start(), search.with_zero[0])
    for n in range(1, ceiling + 1):
        if not has_non_universal([0], start, n):
            return InvariantReport(
                invariant="universality_threshold",
                field=F.name,
                d=d,
                value=n,
                bound_used=ceiling,
                search_cost=search.cost,
            )
    return InvariantReport(invariant="universality_threshold", field=F.name, d=d, value=ceiling, bound_used=ceiling)

