"""Finite Abelian groups stored as explicit multiplication tables, and their characters."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


@dataclass(frozen=True)
class AbelianGroup:
    """Finite Abelian group on the index set ``0..order-1``.

    ``mul[g, h]`` is the product, ``inv[g]`` the inverse.  ``labels`` keeps the
    tuple coordinates for direct products (``(g,)`` for cyclic groups).
    """

    mul: np.ndarray
    identity: int = 0
    labels: tuple = field(default=())
    name: str = ""

    def __post_init__(self):
        mul = np.asarray(self.mul, dtype=np.int64)
        object.__setattr__(self, "mul", mul)
        n = mul.shape[0]
        if mul.shape != (n, n) or n < 1:
            raise ValueError("multiplication table must be square and non-empty")
        if mul.min() < 0 or mul.max() >= n:
            raise ValueError("multiplication table entries out of range")
        e = self.identity
        if not (np.array_equal(mul[e], np.arange(n)) and np.array_equal(mul[:, e], np.arange(n))):
            raise ValueError("identity element does not act trivially")
        if not np.array_equal(mul, mul.T):
            raise ValueError("group is not commutative")
        # associativity: (gh)k == g(hk)
        idx = np.arange(n)
        if not np.array_equal(mul[mul[:, :, None], idx[None, None, :]],
                              mul[idx[:, None, None], mul[None, :, :]]):
            raise ValueError("multiplication table is not associative")
        inv = np.argmax(mul == e, axis=1)
        if not np.all(mul[np.arange(n), inv] == e):
            raise ValueError("some element has no inverse")
        object.__setattr__(self, "inv", inv)
        if not self.labels:
            object.__setattr__(self, "labels", tuple((g,) for g in range(n)))

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    @property
    def elements(self) -> range:
        return range(self.order)

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.mul[x, g]
            k += 1
        return k

    def power(self, g: int, k: int) -> int:
        k %= self.element_order(g)
        x = self.identity
        for _ in range(k):
            x = self.mul[x, g]
        return int(x)

    def __eq__(self, other):
        return isinstance(other, AbelianGroup) and np.array_equal(self.mul, other.mul)

    def __hash__(self):
        return hash(self.mul.tobytes())

    def __repr__(self):
        return f"AbelianGroup({self.name or self.order})"


@dataclass(frozen=True)
class Character:
    """A one-dimensional unitary representation of an Abelian group."""

    group: AbelianGroup
    values: np.ndarray
    index: int = 0

    def __call__(self, g: int) -> complex:
        return complex(self.values[g])

    def conj(self) -> "Character":
        return Character(self.group, np.conj(self.values), self.index)

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.group, self.values * other.values)

    def is_trivial(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.values, 1.0, atol=atol))


def make_cyclic(n: int) -> AbelianGroup:
    """The cyclic group Z_n under addition mod n."""
    if n < 1:
        raise ValueError("cyclic group order must be positive")
    g = np.arange(n)
    return AbelianGroup((g[:, None] + g[None, :]) % n, name=f"Z{n}")


def direct_product(a: AbelianGroup, b: AbelianGroup) -> AbelianGroup:
    """Componentwise product; element ``(i, j)`` is stored at index ``i * |b| + j``."""
    na, nb = a.order, b.order
    mul = np.empty((na * nb, na * nb), dtype=np.int64)
    for (i, j), (k, l) in product(product(range(na), range(nb)), repeat=2):
        mul[i * nb + j, k * nb + l] = a.mul[i, k] * nb + b.mul[j, l]
    labels = tuple(la + lb for la, lb in product(a.labels, b.labels))
    return AbelianGroup(mul, identity=a.identity * nb + b.identity, labels=labels,
                        name=f"{a.name or a.order}x{b.name or b.order}")


def _cyclic_factors(G: AbelianGroup) -> list[int]:
    # tuple labels of products of cyclic groups carry the factor structure
    width = len(G.labels[0])
    return [max(lab[i] for lab in G.labels) + 1 for i in range(width)]


def characters(G: AbelianGroup) -> list[Character]:
    """All |G| characters, indexed canonically.

    For Z_n, ``chi_k(g) = exp(2 pi i k g / n)``; for products built with
    :func:`direct_product` the index runs over the same mixed radix as the
    elements and the values multiply componentwise.
    """
    factors = _cyclic_factors(G)
    if int(np.prod(factors)) != G.order:
        # not a product of cyclic tables we built; fall back to brute force
        return _characters_brute(G)
    chars = []
    for idx, k in enumerate(product(*[range(n) for n in factors])):
        vals = np.array([
            np.exp(2j * np.pi * sum(ki * gi / ni for ki, gi, ni in zip(k, lab, factors)))
            for lab in G.labels
        ])
        chars.append(Character(G, vals, idx))
    return chars


def _characters_brute(G: AbelianGroup) -> list[Character]:
    n = G.order
    orders = [G.element_order(g) for g in range(n)]
    roots = [np.exp(2j * np.pi * np.arange(o) / o) for o in orders]
    found: list[np.ndarray] = []
    for choice in product(*roots):
        v = np.array(choice)
        if np.allclose(v[G.mul], v[:, None] * v[None, :]):
            if not any(np.allclose(v, f) for f in found):
                found.append(v)
    return [Character(G, v, i) for i, v in enumerate(found)]


def character_index(G: AbelianGroup, chi: Character) -> int:
    for c in characters(G):
        if np.allclose(c.values, chi.values):
            return c.index
    raise ValueError("not a character of this group")
