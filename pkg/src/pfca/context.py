"""Formal contexts over one-hot encoded categorical data.

Literals are plain integers: ``2 * atom`` is the positive literal of an atom
and ``2 * atom + 1`` its negation, so ``lit ^ 1`` negates and sorting by code
sorts by ``(atom id, sign)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels

BOOLEAN_DOMAINS = ({"0", "1"}, {"false", "true"})


class ContextError(ValueError):
    """Raised for malformed input rows or schemas."""


class ConceptOverflowError(RuntimeError):
    """Raised when classical concept enumeration exceeds its cap."""


def positive(atom: int) -> int:
    return 2 * atom


def negative(atom: int) -> int:
    return 2 * atom + 1


def negate(lit: int) -> int:
    return lit ^ 1


def atom_of(lit: int) -> int:
    return lit >> 1


def is_positive(lit: int) -> bool:
    return not lit & 1


class LiteralSet(frozenset):
    """An immutable set of literal codes.

    Iteration order is that of ``frozenset``; use :attr:`canonical` for the
    deterministic ``(atom id, sign)`` ordering.
    """

    def __new__(cls, literals: Iterable[int] = ()):
        return super().__new__(cls, (int(x) for x in literals))

    @property
    def canonical(self) -> tuple[int, ...]:
        return tuple(sorted(self))

    @property
    def consistent(self) -> bool:
        return not any((lit ^ 1) in self for lit in self if not lit & 1)

    def positives(self) -> frozenset[int]:
        """Atom ids asserted positively."""
        return frozenset(lit >> 1 for lit in self if not lit & 1)

    def __repr__(self) -> str:
        return f"LiteralSet({list(self.canonical)})"


@dataclass(frozen=True)
class Atom:
    id: int
    attribute: str
    value: str | None  # None for a boolean attribute encoded as a single atom

    @property
    def label(self) -> str:
        if self.value is None:
            return self.attribute
        return f"{self.attribute}={self.value}"


@dataclass(frozen=True, eq=False)
class Context:
    """Object x atom incidence table.

    ``incidence[g, m]`` is True when object ``g`` has atom ``m``; ``known[g, m]``
    is False when the object's value for the atom's attribute is missing, in
    which case neither literal of the atom holds for it.
    """

    object_names: tuple[str, ...]
    atoms: tuple[Atom, ...]
    incidence: np.ndarray
    known: np.ndarray
    schema: dict[str, tuple[str, ...]]
    boolean_attributes: frozenset[str] = frozenset()
    attribute_groups: dict[str, tuple[int, ...]] = field(default_factory=dict)
    boolean_encoding: bool = True

    def __post_init__(self):
        for arr in (self.incidence, self.known):
            arr.setflags(write=False)

    @property
    def n_objects(self) -> int:
        return len(self.object_names)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_literals(self) -> int:
        return 2 * len(self.atoms)

    @cached_property
    def literal_matrix(self) -> np.ndarray:
        """Boolean ``(n_objects, n_literals)``: column ``lit`` marks objects satisfying ``lit``."""
        out = np.zeros((self.n_objects, self.n_literals), dtype=bool)
        out[:, 0::2] = self.incidence
        out[:, 1::2] = self.known & ~self.incidence
        out.setflags(write=False)
        return out

    @cached_property
    def literal_bitsets(self) -> np.ndarray:
        return _kernels.pack_columns(self.literal_matrix)

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {a.label: a.id for a in self.atoms}

    def literal_label(self, lit: int) -> str:
        sign = "+" if is_positive(lit) else "-"
        return sign + self.atoms[atom_of(lit)].label

    def parse_literal(self, label: str) -> int:
        if not label or label[0] not in "+-":
            raise ContextError(f"literal label must start with '+' or '-': {label!r}")
        try:
            atom = self._label_index[label[1:]]
        except KeyError:
            raise ContextError(f"unknown atom label {label[1:]!r}") from None
        return positive(atom) if label[0] == "+" else negative(atom)

    def atom_id(self, attribute: str, value: str | None = None) -> int:
        label = attribute if value is None else f"{attribute}={value}"
        return self._label_index[label]

    def object_index(self, name: str) -> int:
        return self.object_names.index(name)

    def extent_mask(self, literals: Iterable[int]) -> np.ndarray:
        """Boolean mask of objects satisfying every literal."""
        lits = list(literals)
        if not lits:
            return np.ones(self.n_objects, dtype=bool)
        return self.literal_matrix[:, lits].all(axis=1)

    def value_of(self, g: int, attribute: str) -> str | None:
        for a in self.attribute_groups[attribute]:
            if self.known[g, a] and self.incidence[g, a]:
                return "1" if self.atoms[a].value is None else self.atoms[a].value
        if attribute in self.boolean_attributes and self.known[g, self.attribute_groups[attribute][0]]:
            return "0"
        return None


def _is_boolean_domain(values: Sequence[str]) -> bool:
    lowered = {str(v).lower() for v in values}
    return len(values) == 2 and lowered in BOOLEAN_DOMAINS


def _true_value(values: Sequence[str]) -> str:
    for v in values:
        if str(v).lower() in ("1", "true"):
            return v
    raise AssertionError(values)


def build_context(
    rows: Iterable[tuple[str, Mapping[str, object]]],
    schema: Mapping[str, Sequence[object]],
    boolean: bool = True,
) -> Context:
    """Encode categorical rows into a formal context.

    Atoms are numbered in schema order, then value order. With ``boolean=True``
    an attribute whose domain is ``{0, 1}`` (or ``{false, true}``) becomes a
    single atom; otherwise every value gets its own one-hot atom. A value that
    is ``None`` or ``""`` is missing: no literal of that attribute holds.
    """
    schema = {str(k): tuple(str(v) for v in vals) for k, vals in schema.items()}
    atoms: list[Atom] = []
    groups: dict[str, tuple[int, ...]] = {}
    bool_attrs = set()
    for attr, values in schema.items():
        if len(set(values)) != len(values):
            raise ContextError(f"attribute {attr!r} has duplicate values in its domain")
        if boolean and _is_boolean_domain(values):
            bool_attrs.add(attr)
            groups[attr] = (len(atoms),)
            atoms.append(Atom(len(atoms), attr, None))
        else:
            ids = []
            for v in values:
                ids.append(len(atoms))
                atoms.append(Atom(len(atoms), attr, v))
            groups[attr] = tuple(ids)

    names: list[str] = []
    inc_rows = []
    known_rows = []
    for r, (name, record) in enumerate(rows):
        inc = np.zeros(len(atoms), dtype=bool)
        kn = np.ones(len(atoms), dtype=bool)
        for attr, raw in record.items():
            if attr not in schema:
                raise ContextError(f"row {r} ({name!r}): unknown attribute {attr!r}")
        for attr, values in schema.items():
            raw = record.get(attr)
            ids = groups[attr]
            if raw is None or raw == "":
                kn[list(ids)] = False
                continue
            value = str(raw)
            if value not in values:
                raise ContextError(
                    f"row {r} ({name!r}), column {attr!r}: value {value!r} not in domain {list(values)}"
                )
            if attr in bool_attrs:
                inc[ids[0]] = value == _true_value(values)
            else:
                inc[ids[values.index(value)]] = True
        names.append(str(name))
        inc_rows.append(inc)
        known_rows.append(kn)

    shape = (len(names), len(atoms))
    incidence = np.array(inc_rows, dtype=bool).reshape(shape)
    known = np.array(known_rows, dtype=bool).reshape(shape)
    return Context(
        object_names=tuple(names),
        atoms=tuple(atoms),
        incidence=incidence,
        known=known,
        schema=schema,
        boolean_attributes=frozenset(bool_attrs),
        attribute_groups=groups,
        boolean_encoding=boolean,
    )


def object_intent(ctx: Context, g: int) -> LiteralSet:
    """Every decided literal of object ``g``; atoms with a missing value are left out."""
    if not 0 <= g < ctx.n_objects:
        raise IndexError(f"unknown object id {g}")
    lits = []
    for a in range(ctx.n_atoms):
        if ctx.known[g, a]:
            lits.append(positive(a) if ctx.incidence[g, a] else negative(a))
    return LiteralSet(lits)


def derive_up(ctx: Context, objects: Iterable[int]) -> frozenset[int]:
    """Atoms shared by all given objects (all atoms for the empty set)."""
    idx = list(objects)
    if not idx:
        return frozenset(range(ctx.n_atoms))
    common = ctx.incidence[idx].all(axis=0)
    return frozenset(int(a) for a in np.flatnonzero(common))


def derive_down(ctx: Context, atoms: Iterable[int]) -> frozenset[int]:
    """Objects having every given atom.

    A :class:`LiteralSet` argument is read as literals instead, so negative
    literals select objects lacking the atom.
    """
    if isinstance(atoms, LiteralSet):
        mask = ctx.extent_mask(atoms)
    else:
        ids = list(atoms)
        mask = ctx.incidence[:, ids].all(axis=1) if ids else np.ones(ctx.n_objects, dtype=bool)
    return frozenset(int(g) for g in np.flatnonzero(mask))


def enumerate_formal_concepts(ctx: Context, cap: int = 100_000) -> list[tuple[frozenset[int], frozenset[int]]]:
    """All classical concepts ``(extent, intent)`` in lectic order of intents (NextClosure)."""
    m = ctx.n_atoms
    if m > 20:
        raise ContextError(f"classical enumeration is limited to 20 atoms, got {m}")
    rows = [sum(1 << a for a in range(m) if ctx.incidence[g, a]) for g in range(ctx.n_objects)]
    full = (1 << m) - 1

    def close(b: int) -> int:
        out = full
        for r in rows:
            if r & b == b:
                out &= r
        return out

    def extent(b: int) -> frozenset[int]:
        return frozenset(g for g, r in enumerate(rows) if r & b == b)

    def bits_to_set(b: int) -> frozenset[int]:
        return frozenset(a for a in range(m) if b >> a & 1)

    concepts = []
    current = close(0)
    while True:
        if len(concepts) >= cap:
            raise ConceptOverflowError(f"more than {cap} formal concepts")
        concepts.append((extent(current), bits_to_set(current)))
        # next closed set in lectic order (atom 0 is the most significant position)
        nxt = None
        for i in range(m - 1, -1, -1):
            bit = 1 << i
            if current & bit:
                continue
            low = bit - 1
            candidate = close((current & low) | bit)
            if candidate & low == current & low:
                nxt = candidate
                break
        if nxt is None:
            return concepts
        current = nxt
