"""Finite reflection groups, the permutations they induce on alternatives, and invariance checks.

Every group element is a coordinate-reflection mask on the unit cube:
``g(x)_i = 1 - x_i`` where the mask is set. Masks compose by XOR, each element
is its own inverse, and every element preserves Lebesgue measure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from ..common.errors import ConfigError, InvarianceError
from ..common.utils import as_batch, stable_key
from ..densities.service import Density
from .schemas import PermutationRecord, RegionCheckReport, RegionViolation

logger = logging.getLogger(__name__)

PROBE_COUNT = 100
MATCH_ABS_TOL = 1e-12
MATCH_REL_TOL = 1e-12

Decision = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GroupAction:
    name: str
    masks: tuple[tuple[bool, ...], ...]
    labels: tuple[str, ...] = ()
    composition_table: tuple[tuple[int, ...], ...] = field(init=False)
    identity_index: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.masks:
            raise InvarianceError(f"{self.name}: a group needs at least one element", element_index=0)
        width = len(self.masks[0])
        if any(len(mask) != width for mask in self.masks):
            raise InvarianceError(f"{self.name}: every element must act on {width} coordinates", element_index=0)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"g{i + 1}" for i in range(len(self.masks))))

        index = {mask: i for i, mask in enumerate(self.masks)}
        if len(index) != len(self.masks):
            raise InvarianceError(f"{self.name}: duplicate group elements", element_index=len(index))
        identity = tuple(False for _ in range(width))
        if identity not in index:
            raise InvarianceError(f"{self.name}: the identity element is missing", element_index=0)

        table = []
        for a, mask_a in enumerate(self.masks):
            row = []
            for mask_b in self.masks:
                product = tuple(x != y for x, y in zip(mask_a, mask_b))
                if product not in index:
                    raise InvarianceError(f"{self.name}: not closed under composition", element_index=a)
                row.append(index[product])
            table.append(tuple(row))
        object.__setattr__(self, "composition_table", tuple(table))
        object.__setattr__(self, "identity_index", index[identity])

    @property
    def order(self) -> int:
        return len(self.masks)

    @property
    def dimension(self) -> int:
        return len(self.masks[0])

    def inverse_index(self, element: int) -> int:
        self._check_index(element)
        return element

    def compose(self, a: int, b: int) -> int:
        """Index of g_a after g_b."""
        self._check_index(a)
        self._check_index(b)
        return self.composition_table[a][b]

    def _check_index(self, element: int) -> None:
        if not 0 <= element < self.order:
            raise InvarianceError(f"{self.name}: element {element} out of range 0..{self.order - 1}", element)


@dataclass(frozen=True)
class InducedPermutation:
    """pi with p_pi(i)(x) = p_i(g^-1 x); stored 0-based."""

    group_element_index: int
    permutation: tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.permutation[i]

    def then(self, other: "InducedPermutation") -> tuple[int, ...]:
        """Composition self ∘ other as a plain tuple."""
        return tuple(self.permutation[j] for j in other.permutation)

    def record(self, group: GroupAction) -> PermutationRecord:
        return PermutationRecord(
            element=self.group_element_index + 1,
            label=group.labels[self.group_element_index],
            mapping=[j + 1 for j in self.permutation],
        )


def reflection_group(n: int) -> GroupAction:
    """{identity, x -> 1 - x} acting on all n coordinates together."""
    if n < 1:
        raise ConfigError("invalid dimension", [f"reflection group dimension must be >= 1, got {n}"])
    return GroupAction(
        name="reflect-1d",
        masks=(tuple([False] * n), tuple([True] * n)),
        labels=("identity", "reflect"),
    )


def quad_reflection_group() -> GroupAction:
    """g1 = id, g2 = (1-x, y), g3 = (x, 1-y), g4 = (1-x, 1-y)."""
    return GroupAction(
        name="reflect-2d-quad",
        masks=((False, False), (True, False), (False, True), (True, True)),
        labels=("g1", "g2", "g3", "g4"),
    )


GROUPS: dict[str, Callable[[int], GroupAction]] = {
    "reflect-1d": reflection_group,
    "reflect-2d-quad": lambda n: quad_reflection_group(),
}


def resolve_group(group_id: str, n: int) -> GroupAction:
    if group_id not in GROUPS:
        raise ConfigError(f"unknown group '{group_id}'", [f"valid group ids: {', '.join(sorted(GROUPS))}"])
    group = GROUPS[group_id](n)
    if group.dimension != n:
        raise ConfigError(f"group {group_id} acts on {group.dimension} coordinates, not {n}")
    return group


def apply(group: GroupAction, element: int, x) -> np.ndarray:
    """g(x) for one point or a batch ``(N, n)``.

    Reflection twice returns x up to one rounding of 1 - x.
    """
    group._check_index(element)
    points = np.asarray(x, dtype=np.float64)
    mask = np.asarray(group.masks[element], dtype=bool)
    if points.shape[-1] != mask.size:
        raise InvarianceError(f"{group.name}: point has {points.shape[-1]} coordinates, expected {mask.size}", element)
    return np.where(mask, 1.0 - points, points)


def probe_points(n: int, count: int = PROBE_COUNT, name: str = "invariance-probe") -> np.ndarray:
    """Deterministic probe set in the open unit cube."""
    rng = np.random.Generator(np.random.Philox(stable_key(name)))
    return rng.random((count, n))


def _matches(left: np.ndarray, right: np.ndarray) -> bool:
    both_inf = np.isneginf(left) & np.isneginf(right)
    with np.errstate(invalid="ignore"):
        close = np.abs(left - right) <= MATCH_ABS_TOL + MATCH_REL_TOL * np.abs(right)
    return bool(np.all(both_inf | close))


def induced_permutations(
    group: GroupAction,
    alternatives: Sequence[Density],
    probe: Optional[np.ndarray] = None,
) -> list[InducedPermutation]:
    """One permutation per group element, matched numerically on a probe set."""
    if probe is None:
        probe = probe_points(group.dimension)
    probe = as_batch(probe, group.dimension)
    logs_at_x = [alt.log_pdf(probe) for alt in alternatives]

    result = []
    for element in range(group.order):
        moved = apply(group, group.inverse_index(element), probe)
        mapping = []
        for i, alt in enumerate(alternatives):
            target = alt.log_pdf(moved)
            candidates = [j for j, logs in enumerate(logs_at_x) if _matches(logs, target)]
            if not candidates:
                raise InvarianceError(
                    f"{group.name}: element {group.labels[element]} maps alternative {i + 1} outside the set",
                    element,
                )
            mapping.append(candidates[0])
        if len(set(mapping)) != len(mapping):
            raise InvarianceError(f"{group.name}: element {group.labels[element]} induces no bijection", element)
        result.append(InducedPermutation(element, tuple(mapping)))
    logger.debug("%s: induced permutations %s", group.name, [perm.permutation for perm in result])
    return result


def is_transitive(perms: Sequence[InducedPermutation], s: int) -> bool:
    """True iff for every (i, j) some stored permutation maps i to j."""
    reach = np.zeros((s, s), dtype=bool)
    for perm in perms:
        reach[np.arange(s), np.asarray(perm.permutation[:s])] = True
    return bool(reach.all())


def composition_consistent(group: GroupAction, perms: Sequence[InducedPermutation]) -> bool:
    """The permutation induced by g_a g_b equals pi_a ∘ pi_b for every pair."""
    by_element = {perm.group_element_index: perm for perm in perms}
    for a in range(group.order):
        for b in range(group.order):
            product = by_element[group.compose(a, b)]
            if product.permutation != by_element[a].then(by_element[b]):
                return False
    return True


def orbit_average_deviation(group: GroupAction, alternatives: Sequence[Density], probe: np.ndarray) -> float:
    """Largest |log mean p_i(g x) - log mean p_i(x)| over elements and probes."""
    probe = as_batch(probe, group.dimension)

    def log_mean(points: np.ndarray) -> np.ndarray:
        logs = np.stack([alt.log_pdf(points) for alt in alternatives])
        return logsumexp(logs, axis=0) - np.log(len(alternatives))

    base = log_mean(probe)
    worst = 0.0
    for element in range(group.order):
        moved = log_mean(apply(group, element, probe))
        finite = np.isfinite(base) & np.isfinite(moved)
        if finite.any():
            worst = max(worst, float(np.max(np.abs(moved[finite] - base[finite]))))
    return worst


def symmetrize_region_check(decision: Decision, group: GroupAction, probe) -> RegionCheckReport:
    """Every probe x with decision(x) != decision(g x) for some element g.

    ``decision`` is vectorized: a ``(N, n)`` batch in, ``N`` booleans out.
    """
    points = as_batch(probe, group.dimension)
    at_x = np.asarray(decision(points), dtype=bool)
    violations: list[RegionViolation] = []
    for element in range(group.order):
        if element == group.identity_index:
            continue
        at_gx = np.asarray(decision(apply(group, element, points)), dtype=bool)
        for row in np.flatnonzero(at_x != at_gx):
            violations.append(RegionViolation(point=points[row].tolist(), element=element + 1))
    if violations:
        logger.info("%s: %d region violations over %d probes", group.name, len(violations), points.shape[0])
    return RegionCheckReport(
        group=group.name,
        probes=points.shape[0],
        violation_count=len(violations),
        violations=violations,
    )
