"""
Sequences and Test Families

Index-generated sequences of sets, functionals and vectors with their
declared limits, and the families of test objects the checkers probe them
with.
"""

import threading
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from convlab.config import config
from convlab.engine.convex_sets import ConvexSet, Polytope
from convlab.engine.space import Functional, NormSpec, Vector
from convlab.engine.tail import tail_indices, tail_start


def _check_horizon(horizon: int, start_index: int) -> None:
    if start_index < 1:
        raise ValueError("start index must be at least 1")
    if horizon < max(4, start_index + 2):
        raise ValueError("horizon must be at least 4 and leave a tail of three indices")


class _Indexed:
    def __init__(self, horizon: int, start_index: int, tail_samples: Optional[int]):
        self.horizon = horizon
        self.start_index = start_index
        self.tail_samples = tail_samples

    def tail(self) -> List[int]:
        samples = config.TAIL_SAMPLES if self.tail_samples is None else self.tail_samples
        return tail_indices(self.horizon, self.start_index, samples)

    @property
    def tail_start(self) -> int:
        return tail_start(self.horizon, self.start_index)


class SetSequence(_Indexed):
    """n -> C_n on [start_index, horizon] with a declared limit C."""

    def __init__(self, generator: Callable[[int], ConvexSet], limit: ConvexSet, norm: NormSpec,
                 horizon: Optional[int] = None, start_index: int = 1,
                 tail_samples: Optional[int] = None):
        horizon = config.DEFAULT_HORIZON if horizon is None else horizon
        _check_horizon(horizon, start_index)
        super().__init__(horizon, start_index, tail_samples)
        self.generator = generator
        self.limit = limit
        self.norm = norm
        self._cache: Dict[int, ConvexSet] = {}
        self._cache_lock = threading.Lock()

    def at(self, n: int) -> ConvexSet:
        if n < self.start_index or n > self.horizon:
            raise IndexError(f"index {n} outside [{self.start_index}, {self.horizon}]")
        with self._cache_lock:
            member = self._cache.get(n)
        if member is None:
            # generated outside the lock; the first stored member wins
            generated = self.generator(n)
            with self._cache_lock:
                member = self._cache.setdefault(n, generated)
        return member


class FunctionalSequence(_Indexed):
    """n -> f_n with limit f; norm is the norm whose dual is probed."""

    def __init__(self, generator: Callable[[int], Functional], limit: Functional, norm: NormSpec,
                 horizon: Optional[int] = None, start_index: int = 1,
                 tail_samples: Optional[int] = None):
        horizon = config.DEFAULT_HORIZON if horizon is None else horizon
        _check_horizon(horizon, start_index)
        super().__init__(horizon, start_index, tail_samples)
        self.generator = generator
        self.limit = limit
        self.norm = norm

    def at(self, n: int) -> Functional:
        return self.generator(n)


class VectorSequence(_Indexed):
    def __init__(self, generator: Callable[[int], Vector], horizon: Optional[int] = None,
                 start_index: int = 1, tail_samples: Optional[int] = None):
        horizon = config.DEFAULT_HORIZON if horizon is None else horizon
        _check_horizon(horizon, start_index)
        super().__init__(horizon, start_index, tail_samples)
        self.generator = generator

    def at(self, n: int) -> Vector:
        return self.generator(n)


class FamilyKind(str, Enum):
    POINTS = "points"
    COMPACT = "compact"
    WEAK_COMPACT = "weakCompact"
    BOUNDED = "bounded"


class TestFamily:
    """Test points or test sets, each with a stable id."""

    __test__ = False

    def __init__(self, kind: FamilyKind, members: Sequence, ids: Optional[Sequence[str]] = None):
        kind = FamilyKind(kind)
        members = tuple(members)
        if not members:
            raise ValueError("a test family needs at least one member")
        for m in members:
            if kind == FamilyKind.POINTS and not isinstance(m, Vector):
                raise ValueError("point families hold vectors")
            if kind in (FamilyKind.COMPACT, FamilyKind.WEAK_COMPACT) and not isinstance(m, Polytope):
                raise ValueError(f"{kind.value} families hold polytopes")
            if kind == FamilyKind.BOUNDED and not (isinstance(m, ConvexSet) and m.bounded):
                raise ValueError("bounded families hold bounded sets")
        prefix = "x" if kind == FamilyKind.POINTS else "W"
        ids = tuple(ids) if ids is not None else tuple(f"{prefix}{k}" for k in range(len(members)))
        if len(ids) != len(members) or len(set(ids)) != len(ids):
            raise ValueError("family ids must be distinct, one per member")
        self.kind = kind
        self.members = members
        self.ids: Tuple[str, ...] = ids

    def items(self):
        return zip(self.ids, self.members)

    def as_sets(self) -> List[Tuple[str, ConvexSet]]:
        if self.kind == FamilyKind.POINTS:
            return [(i, Polytope.point(m)) for i, m in self.items()]
        return list(self.items())

    def __len__(self) -> int:
        return len(self.members)
