"""Variable registries binding polynomial exponent slots to names."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class RegistryMismatch(ValueError):
    """Raised when two exact objects built on different registries are combined."""


@dataclass(frozen=True)
class VariableRegistry:
    """Ordered variable names with a contiguous block of dynamical coordinates.

    The dynamical block always occupies slots ``0 .. n-1``; the shift scale
    ``mu`` follows at slot ``n``; any extra parameters come after it.  Only the
    dynamical block is ever shifted (by integer multiples of ``mu``).
    """

    qnames: tuple[str, ...]
    extras: tuple[str, ...] = ()
    mu: str = "mu"
    names: tuple[str, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = tuple(self.qnames) + (self.mu,) + tuple(self.extras)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if not self.qnames:
            raise ValueError("registry needs at least one dynamical coordinate")
        object.__setattr__(self, "qnames", tuple(self.qnames))
        object.__setattr__(self, "extras", tuple(self.extras))
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", {nm: i for i, nm in enumerate(names)})

    @classmethod
    def standard(cls, n: int, masses: bool = True, extras: Iterable[str] = ()) -> "VariableRegistry":
        """Registry ``q1..qn, mu`` plus optional masses ``m1..mn`` and extras."""
        if n < 1:
            raise ValueError("n must be positive")
        ex: list[str] = []
        if masses:
            ex.extend(f"m{i}" for i in range(1, n + 1))
        ex.extend(extras)
        return cls(tuple(f"q{i}" for i in range(1, n + 1)), tuple(ex))

    @property
    def n(self) -> int:
        return len(self.qnames)

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def mu_index(self) -> int:
        return self.n

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}; registry has {self.names}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def with_extras(self, more: Sequence[str]) -> "VariableRegistry":
        add = [v for v in more if v not in self._index]
        return VariableRegistry(self.qnames, self.extras + tuple(add), self.mu)

    def check(self, other: "VariableRegistry") -> None:
        if self is not other and self != other:
            raise RegistryMismatch(f"registry mismatch: {self.names} vs {other.names}")
