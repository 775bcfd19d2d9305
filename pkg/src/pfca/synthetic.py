"""Synthetic prototype data shaped like the duplicated-digits experiment.

Each class has one prototype row of categorical values; every class is
copied ``copies_per_class`` times, a fixed number of cells is perturbed, and
the rows are shuffled. Class labels are returned separately and are never
part of the context.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .context import Context, build_context


class SyntheticError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int = 12
    copies_per_class: int = 30
    n_attributes: int = 24
    values_per_attribute: int = 8
    min_pairwise_hamming: int | None = None  # default n_attributes // 2
    noise_rate: float = 0.0
    max_tries: int = 10_000

    def __post_init__(self):
        if self.n_classes < 1 or self.copies_per_class < 1 or self.n_attributes < 1:
            raise SyntheticError("class, copy and attribute counts must be positive")
        if self.values_per_attribute < 2:
            raise SyntheticError("values_per_attribute must be at least 2")
        if not 0 <= self.noise_rate <= 1:
            raise SyntheticError("noise_rate must lie in [0, 1]")
        if self.hamming > self.n_attributes:
            raise SyntheticError("min_pairwise_hamming exceeds the number of attributes")

    @property
    def hamming(self) -> int:
        if self.min_pairwise_hamming is None:
            return self.n_attributes // 2
        return self.min_pairwise_hamming

    @property
    def n_objects(self) -> int:
        return self.n_classes * self.copies_per_class

    @property
    def n_flips(self) -> int:
        return int(round(self.noise_rate * self.n_objects * self.n_attributes))


def attribute_names(spec: SyntheticSpec) -> list[str]:
    width = len(str(spec.n_attributes))
    return [f"q{j + 1:0{width}d}" for j in range(spec.n_attributes)]


def make_prototypes(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """Rejection-sample class prototypes with pairwise Hamming distance >= the requested minimum."""
    protos: list[np.ndarray] = []
    tries = 0
    while len(protos) < spec.n_classes:
        tries += 1
        if tries > spec.max_tries:
            raise SyntheticError(
                f"could not place {spec.n_classes} prototypes at Hamming distance >= {spec.hamming} "
                f"within {spec.max_tries} tries"
            )
        cand = rng.integers(0, spec.values_per_attribute, size=spec.n_attributes)
        if all(np.count_nonzero(cand != p) >= spec.hamming for p in protos):
            protos.append(cand)
    return np.array(protos)


def generate_table(spec: SyntheticSpec, seed: int):
    """``(values, labels, prototypes, flipped cells)`` as integer arrays, rows shuffled."""
    rng = np.random.default_rng(seed)
    protos = make_prototypes(spec, rng)
    labels = np.repeat(np.arange(spec.n_classes), spec.copies_per_class)
    values = protos[labels].copy()
    n_cells = values.size
    flips = np.sort(rng.choice(n_cells, size=spec.n_flips, replace=False)) if spec.n_flips else np.array([], int)
    for cell in flips:
        r, c = divmod(int(cell), spec.n_attributes)
        shift = rng.integers(1, spec.values_per_attribute)
        values[r, c] = (values[r, c] + shift) % spec.values_per_attribute
    order = rng.permutation(spec.n_objects)
    return values[order], labels[order], protos, flips


def generate_synthetic(spec: SyntheticSpec | None = None, seed: int = 1):
    """Context, per-object class labels, and the prototype value table."""
    spec = spec or SyntheticSpec()
    values, labels, protos, _ = generate_table(spec, seed)
    names = attribute_names(spec)
    schema = {a: tuple(str(v) for v in range(spec.values_per_attribute)) for a in names}
    width = len(str(spec.n_objects))
    rows = [
        (f"o{i + 1:0{width}d}", {a: str(values[i, j]) for j, a in enumerate(names)})
        for i in range(spec.n_objects)
    ]
    ctx = build_context(rows, schema, boolean=False)
    return ctx, [int(x) for x in labels], protos


def prototype_atoms(ctx: Context, prototype) -> frozenset[int]:
    """Atom ids a prototype row asserts positively."""
    names = list(ctx.schema)
    return frozenset(ctx.atom_id(a, str(int(v))) for a, v in zip(names, prototype))
