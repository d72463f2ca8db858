"""Descending subgroup chains, their finite quotient towers, and chain tests.

A chain H_1 >= H_2 >= ... of finite-index subgroups yields a tower of coset
spaces G/H_l with bonding surjections.  The normal-core cofinality verdict
and the interleaving test quantify over the available depth only; every
verdict records the depth it was computed at and failure witnesses re-verify
by independent membership calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .affine import (
    AffineGroup,
    FiniteIndexSubgroup,
    contains,
    coset_space,
    element_not_in,
    normal_core,
    subgroup_index_in,
    subgroup_le,
)
from .errors import StructureError


@dataclass(frozen=True)
class SubgroupChain:
    """A strictly descending chain of finite-index subgroups of one group."""

    group: AffineGroup
    levels: tuple
    label: str = "chain"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise StructureError("chain needs at least one level")
        for h in self.levels:
            if not self.group.contains_subgroup(h):
                raise StructureError("chain level is not a subgroup of the group")
            self.group.index_of(h)  # raises if not finite index
        for a, b in zip(self.levels, self.levels[1:]):
            if not subgroup_le(b, a):
                raise StructureError("chain is not descending")
            if subgroup_index_in(b, a) <= 1:
                raise StructureError(
                    "chain is not proper: consecutive levels have index ratio 1"
                )

    @property
    def depth(self):
        return len(self.levels)

    def indices(self):
        return [self.group.index_of(h) for h in self.levels]

    def truncate(self, depth):
        if depth < 1 or depth > self.depth:
            raise StructureError(f"depth {depth} outside 1..{self.depth}")
        return SubgroupChain(self.group, self.levels[:depth], self.label)


@dataclass(frozen=True)
class QuotientTower:
    """Coset spaces G/H_l with bonding maps from each level to the previous."""

    chain: SubgroupChain
    levels: tuple  # CosetSpace per level
    bonding: tuple  # bonding[l] : level l+1 indices -> level l indices

    @property
    def depth(self):
        return len(self.levels)

    def project(self, deep_level, coset_index, shallow_level):
        """Image of a level `deep_level` coset at `shallow_level` (1-based)."""
        if not 1 <= shallow_level <= deep_level <= self.depth:
            raise StructureError("levels out of range for projection")
        i = coset_index
        for l in range(deep_level - 1, shallow_level - 1, -1):
            i = self.bonding[l - 1][i]
        return i

    def coordinates(self, coset_index):
        """Compatible coset ids at every level for a deepest-level coset."""
        k = self.depth
        return tuple(self.project(k, coset_index, l) for l in range(1, k + 1))


def build_tower(chain, depth=None, *, cap=None):
    """Coset spaces per level plus bonding maps computed by rep reduction."""
    depth = chain.depth if depth is None else depth
    chain = chain.truncate(depth)
    spaces = [coset_space(chain.group, h, cap=cap) for h in chain.levels]
    bonding = []
    for l in range(len(spaces) - 1):
        fine, coarse = spaces[l + 1], spaces[l]
        ratio = subgroup_index_in(chain.levels[l + 1], chain.levels[l])
        mapping = tuple(coarse.index_of_element(rep) for rep in fine.reps)
        fibers = {}
        for i in mapping:
            fibers[i] = fibers.get(i, 0) + 1
        if set(fibers) != set(range(coarse.index)):
            raise StructureError("bonding map is not surjective")
        if any(c != ratio for c in fibers.values()):
            raise StructureError("bonding map fibers are not of constant size")
        bonding.append(mapping)
    return QuotientTower(chain, tuple(spaces), tuple(bonding))


@dataclass(frozen=True)
class TruncatedPoint:
    """One coset id per level, compatible under the bonding maps."""

    tower: QuotientTower
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) != self.tower.depth:
            raise StructureError("coordinate count must match the tower depth")
        for l, (fine, coarse) in enumerate(zip(self.coords[1:], self.coords)):
            if self.tower.bonding[l][fine] != coarse:
                raise StructureError(
                    f"incompatible coordinates between levels {l + 1} and {l + 2}"
                )

    def project(self, level):
        if not 1 <= level <= len(self.coords):
            raise StructureError("projection level out of range")
        return self.coords[level - 1]


def truncated_point(tower, deepest_index):
    """The compatible coordinate sequence of a deepest-level coset."""
    if not 0 <= deepest_index < tower.levels[-1].index:
        raise StructureError("coset index out of range at the deepest level")
    return TruncatedPoint(tower, tower.coordinates(deepest_index))


# ------------------------------------------------------------------ McCord

@dataclass(frozen=True)
class McCordLevel:
    level: int
    core: FiniteIndexSubgroup
    cofinal_at: int = None
    witness: object = None  # AffineElement in H_{deepest} \ core when not cofinal

    @property
    def cofinal(self):
        return self.cofinal_at is not None


@dataclass(frozen=True)
class McCordVerdict:
    chain: SubgroupChain
    records: tuple

    @property
    def compatible(self):
        return all(r.cofinal for r in self.records)

    @property
    def depth(self):
        return self.chain.depth


def mccord_verdict(chain, *, cap=None):
    """Per level, the least l' with H_l' inside core(H_l), or a verified witness."""
    records = []
    for l, h in enumerate(chain.levels, start=1):
        core = normal_core(chain.group, h, cap=cap)
        cofinal_at = None
        for lp, hp in enumerate(chain.levels, start=1):
            if subgroup_le(hp, core):
                cofinal_at = lp
                break
        if cofinal_at is not None:
            records.append(McCordLevel(l, core, cofinal_at=cofinal_at))
            continue
        deepest = chain.levels[-1]
        witness = element_not_in(deepest, core)
        if witness is None:
            raise StructureError("containment test and witness search disagree")
        if not contains(deepest, witness) or contains(core, witness):
            raise StructureError("McCord witness failed re-verification")
        records.append(McCordLevel(l, core, witness=witness))
    return McCordVerdict(chain, tuple(records))


# -------------------------------------------------------------- interleave

@dataclass(frozen=True)
class InterleaveVerdict:
    success: bool
    map_ab: tuple = None  # for each level l of A, least nu with B_nu <= A_l
    map_ba: tuple = None  # for each level nu of B, least l with A_l <= B_nu
    fail_side: str = None  # "A" or "B": which chain's level lacked a partner
    fail_level: int = None
    witness: object = None


def _least_contained_level(target, levels):
    for i, h in enumerate(levels, start=1):
        if subgroup_le(h, target):
            return i
    return None


def interleave(chain_a, chain_b):
    """Mutual cofinal containment of two chains within the available depth."""
    if (
        chain_a.group.dimension != chain_b.group.dimension
        or chain_a.group.denom != chain_b.group.denom
        or chain_a.group.normal_form != chain_b.group.normal_form
    ):
        raise StructureError("chains must live in the same ambient group")
    map_ab = []
    for l, h in enumerate(chain_a.levels, start=1):
        nu = _least_contained_level(h, chain_b.levels)
        if nu is None:
            witness = element_not_in(chain_b.levels[-1], h)
            return InterleaveVerdict(
                False, fail_side="A", fail_level=l, witness=witness
            )
        map_ab.append(nu)
    map_ba = []
    for nu, h in enumerate(chain_b.levels, start=1):
        l = _least_contained_level(h, chain_a.levels)
        if l is None:
            witness = element_not_in(chain_a.levels[-1], h)
            return InterleaveVerdict(
                False, fail_side="B", fail_level=nu, witness=witness
            )
        map_ba.append(l)
    return InterleaveVerdict(True, tuple(map_ab), tuple(map_ba))


def subgroup_cylinder(tower, subgroup):
    """Deepest-level addresses lying in the image of a subgroup.

    The cosets of H_K inside S * H_K form the orbit of the identity coset
    under left multiplication by S's generators, so this is a plain orbit
    computation in the deepest coset space.
    """
    deepest = tower.levels[-1]
    perms = []
    for el in subgroup.generator_elements():
        perms.append(deepest.permutation_of(el))
        perms.append(deepest.permutation_of(el.inverse()))
    start = deepest.index_of_element(tower.chain.group.identity())
    seen = {start}
    frontier = [start]
    while frontier:
        new = []
        for i in frontier:
            for p in perms:
                j = p[i]
                if j not in seen:
                    seen.add(j)
                    new.append(j)
        frontier = new
    return frozenset(tower.coordinates(i) for i in seen)


# -------------------------------------------------------- boundary action

def boundary_action(chain, depth=None, *, lam=Fraction(1, 2), cap=None):
    """Left translation on the depth-K coset space as a finite Cantor model.

    Addresses are the compatible coset-id sequences of the tower; generators
    act by the deepest level's permutations; the metric is the tree metric
    with base lam; the basepoint is the identity coset.
    """
    from .action import CantorAction, CantorModel, TreeMetric

    tower = build_tower(chain, depth, cap=cap)
    deepest = tower.levels[-1]
    addresses = tuple(tower.coordinates(i) for i in range(deepest.index))
    model = CantorModel(addresses, tower.depth, TreeMetric(Fraction(lam)))
    generators = {}
    for name, _ in chain.group.generators:
        perm = deepest.gen_perms[name]
        generators[name] = tuple(perm)
    basepoint = addresses[deepest.index_of_element(chain.group.identity())]
    return CantorAction(model, generators, basepoint, label=chain.label)
