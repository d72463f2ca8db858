"""Orbit coding over a finite-depth action: return words, code-equality sets,
translate partitions, and the inductive refinement chain.

The window W is clopen (a union of cylinders).  Return words are the words
whose action sends the basepoint back into W, truncated by length and
deduplicated by their restriction to W.  The level set V is the set of
window points coded identically to the basepoint; its translates under the
return words are pairwise equal or disjoint and, for minimal actions, tile
the window.  The word-length truncation is validated against an equivalent
fixed-point partition refinement and raised automatically when they differ.
All diameters, gaps, and thresholds are exact rationals; no comparison uses
a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .action import enumerate_word_perms, modulus_table
from .errors import InvariantViolation, StructureError

DEFAULT_WORD_BOUND = 8


# ---------------------------------------------------------------- partitions

@dataclass(frozen=True)
class ClopenPartition:
    """Disjoint blocks covering the window, ordered by least address."""

    window: frozenset
    blocks: tuple  # tuple of frozensets

    @classmethod
    def from_blocks(cls, model, window, blocks):
        window = frozenset(window)
        blocks = [frozenset(b) for b in blocks if b]
        seen = set()
        for b in blocks:
            if b & seen:
                raise StructureError("partition blocks overlap")
            seen |= b
        if seen != window:
            raise StructureError("partition blocks do not cover the window")
        blocks.sort(key=lambda b: min(model.index[a] for a in b))
        return cls(window, tuple(blocks))

    def block_index(self, address):
        """1-based block index, or 0 when the address is outside the window."""
        for i, b in enumerate(self.blocks, start=1):
            if address in b:
                return i
        return 0

    def __len__(self):
        return len(self.blocks)


def cylinder_partition(model, subset, depth):
    """Partition of a subset into its depth-j cylinder classes."""
    groups = {}
    for a in subset:
        groups.setdefault(model.cylinder_key(a, depth), set()).add(a)
    return [frozenset(g) for g in groups.values()]


def default_window(action):
    """The depth-1 cylinder containing the basepoint; the full address set
    when that cylinder is a single address (depth-1 models)."""
    model = action.model
    cyl = frozenset(model.cylinder_members(action.basepoint, 1))
    if len(cyl) <= 1:
        return frozenset(model.addresses)
    return cyl


def _check_clopen_window(action, window):
    model = action.model
    window = frozenset(window)
    if action.basepoint not in window:
        raise StructureError("window must contain the basepoint")
    for j in range(model.depth + 1):
        keys = {model.cylinder_key(a, j) for a in window}
        members = {
            a for a in model.addresses if model.cylinder_key(a, j) in keys
        }
        if members == window:
            return window
    raise StructureError("window is not a union of cylinders")


# --------------------------------------------------------------- return words

@dataclass(frozen=True)
class ReturnWordSet:
    """Words of bounded length returning the basepoint to the window,
    deduplicated by their restriction to the window.

    The ball enumeration is layer-atomic under a permutation budget, so
    effective_bound records the last exhaustively enumerated word length;
    one shortest transition word per reachable window address is always
    included regardless of its length.
    """

    words: tuple  # tuple of word tuples, empty word first
    bound: int
    effective_bound: int
    perms: tuple = field(compare=False, repr=False)  # np arrays aligned to words

    def __len__(self):
        return len(self.words)


def _shortest_words_into_window(action, window):
    """One shortest word sending the basepoint to each window address.

    Breadth-first search over the orbit graph; every such word is a return
    word by construction, and for transitive actions their translates of any
    basepoint block reach every window point.
    """
    model = action.model
    w0 = model.index[action.basepoint]
    tokens = [
        (name, sign, action.token_perm(name, sign))
        for name, sign in action.signed_tokens()
    ]
    parent = {w0: ((), None)}
    frontier = [w0]
    while frontier:
        new = []
        for i in frontier:
            for name, sign, p in tokens:
                j = p[i]
                if j not in parent:
                    parent[j] = ((name, sign), i)
                    new.append(j)
        frontier = new
    out = []
    for a in sorted(window, key=lambda x: model.index[x]):
        i = model.index[a]
        if i not in parent:
            continue
        word = []
        cur = i
        while parent[cur][1] is not None:
            tok, cur = parent[cur]
            word.append(tok)
        out.append(tuple(word))
    return out


def return_words(action, window, bound=DEFAULT_WORD_BOUND, *, perm_budget=20000):
    """Ball words of bounded length landing the basepoint in the window, plus
    one shortest transition word per reachable window address."""
    window = _check_clopen_window(action, window)
    model = action.model
    w0 = model.index[action.basepoint]
    win_idx = sorted(model.index[a] for a in window)
    win_set = set(win_idx)
    win_arr = np.array(win_idx, dtype=np.int64)
    seen = set()
    words, perms = [], []

    def consider(word, perm):
        if int(perm[w0]) not in win_set:
            return
        key = perm[win_arr].tobytes()
        if key in seen:
            return
        seen.add(key)
        words.append(word)
        perms.append(perm)

    pairs, completed = enumerate_word_perms(
        action, bound, perm_cap=perm_budget, on_cap="stop"
    )
    for word, perm in pairs:
        consider(word, perm)
    for word in _shortest_words_into_window(action, window):
        perm = np.array(action.word_perm(word), dtype=np.int32)
        consider(word, perm)
    return ReturnWordSet(tuple(words), bound, completed, tuple(perms))


def code(action, window, partition, point, word):
    """Block index of the word's image of the point; 0 outside the window."""
    window = frozenset(window)
    if point not in window:
        raise StructureError("coded point must lie in the window")
    image = action.act(word, point)
    if image not in window:
        return 0
    return partition.block_index(image)


def compute_V(action, window, partition, words):
    """Window points whose code function agrees with the basepoint's."""
    model = action.model
    n = len(model)
    block_id = np.zeros(n, dtype=np.int32)
    for i, b in enumerate(partition.blocks, start=1):
        for a in b:
            block_id[model.index[a]] = i
    w0 = model.index[action.basepoint]
    win_mask = np.zeros(n, dtype=bool)
    for a in window:
        win_mask[model.index[a]] = True
    keep = win_mask.copy()
    for perm in words.perms if isinstance(words, ReturnWordSet) else words:
        codes = block_id[np.asarray(perm)]
        keep &= codes == codes[w0]
    return frozenset(model.addresses[i] for i in np.nonzero(keep)[0])


def translates(action, v, words):
    """Distinct images of V under the return words, first word per image.

    Any two images must be equal or disjoint; overlap without equality is a
    hard error (a mis-specified or non-equicontinuous action).
    """
    model = action.model
    v_idx = sorted(model.index[a] for a in v)
    v_arr = np.array(v_idx, dtype=np.int64)
    out = []
    seen = {}
    covered = set()
    for word, perm in zip(words.words, words.perms):
        img_idx = frozenset(int(i) for i in np.asarray(perm)[v_arr])
        if img_idx in seen:
            continue
        if img_idx & covered:
            other = next(s for s in seen if s & img_idx)
            raise InvariantViolation(
                "translate overlap without equality under word "
                f"{word!r} (images share {len(img_idx & other)} addresses)"
            )
        seen[img_idx] = word
        covered |= img_idx
        out.append((word, frozenset(model.addresses[i] for i in img_idx)))
    return tuple(out)


# ------------------------------------------------------- fixed-point version

def refine_fixed_point(action, window, partition):
    """Coarsest refinement whose blocks have well-defined generator codes.

    Iterated splitting of all classes (the window complement starts as one
    class and splits too) by generator images until stable; bijectivity makes
    the fixed point stable under inverses as well.  Returns the stabilized
    partition restricted to the window.
    """
    model = action.model
    n = len(model)
    window = frozenset(window)
    ids = [0] * n
    for i, b in enumerate(partition.blocks, start=1):
        for a in b:
            ids[model.index[a]] = i
    gens = [action.generators[name] for name in action.generators]
    while True:
        signature = [
            (ids[i],) + tuple(ids[p[i]] for p in gens) for i in range(n)
        ]
        relabel = {}
        new_ids = []
        for sig in signature:
            if sig not in relabel:
                relabel[sig] = len(relabel)
            new_ids.append(relabel[sig])
        if len(relabel) == len(set(ids)):
            break
        ids = new_ids
    blocks = {}
    for a in window:
        blocks.setdefault(ids[model.index[a]], set()).add(a)
    return ClopenPartition.from_blocks(model, window, blocks.values())


def schreier_diameter(action, *, size_cap=4096):
    """Exact diameter of the (undirected) orbit graph, or None above the cap.

    Layered boolean reachability; on disconnected actions the diameter is the
    maximum over connected components.
    """
    n = len(action.model)
    if n > size_cap:
        return None
    perms = [
        np.asarray(action.token_perm(name, sign), dtype=np.int64)
        for name, sign in action.signed_tokens()
    ]
    reach = np.eye(n, dtype=bool)
    dist = np.zeros((n, n), dtype=np.int32)
    d = 0
    while True:
        new = reach.copy()
        for p in perms:
            new |= reach[:, p]
        if (new == reach).all():
            break
        d += 1
        dist[new & ~reach] = d
        reach = new
    return int(dist.max())


# ------------------------------------------------------------- coding chain

@dataclass(frozen=True)
class CodingLevel:
    level: int
    eps: Fraction
    eps_prime: Fraction
    eps_prime_sub_resolution: bool
    eta: Fraction
    delta: Fraction
    delta_sub_resolution: bool
    cylinder_depth: int
    partition: ClopenPartition
    v: frozenset
    translate_family: tuple  # tuple of (word, frozenset)
    covers_window: bool


@dataclass(frozen=True)
class CodingChain:
    window: frozenset
    levels: tuple
    word_bound_requested: int
    word_bound_used: int
    word_bound_effective: int
    return_word_count: int
    schreier_diam: int  # None when above the size cap
    minimal: bool

    @property
    def depth(self):
        return len(self.levels)

    def v_sets(self):
        return [lv.v for lv in self.levels]


def _least_cylinder_depth(model, subset, bound):
    """Least depth whose cylinder classes of the subset all have diameter
    strictly below the bound."""
    for m in range(1, model.depth + 1):
        blocks = cylinder_partition(model, subset, m)
        if all(model.diameter(b) < bound for b in blocks):
            return m, blocks
    raise StructureError("no cylinder depth achieves the requested diameter")


def _eta_of_partition(model, partition, *, include_complement):
    """Least distance between distinct blocks (and to the complement)."""
    best = None
    addrs = list(partition.window)
    bid = {a: partition.block_index(a) for a in addrs}
    for i in range(len(addrs)):
        for j in range(i + 1, len(addrs)):
            if bid[addrs[i]] != bid[addrs[j]]:
                d = model.distance(addrs[i], addrs[j])
                if best is None or d < best:
                    best = d
    if include_complement:
        outside = [a for a in model.addresses if a not in partition.window]
        for a in partition.window:
            for b in outside:
                d = model.distance(a, b)
                if best is None or d < best:
                    best = d
    return best


def _witness_or_subresolution(table, eps):
    value = table.equicontinuity_witness(eps)
    if value is not None:
        return value, False
    sub = table.sub_resolution_delta()
    if sub is None or eps <= 0:
        raise InvariantViolation(
            "no equicontinuity witness exists for the requested scale; "
            "the action's modulus table is degenerate"
        )
    return sub, True


def coding_chain(
    action,
    window=None,
    max_levels=None,
    word_bound=DEFAULT_WORD_BOUND,
    *,
    pair_cap=None,
):
    """Run the inductive refinement: level sets, translates, and constants.

    Stops when the level set is a single address or the requested level
    count is reached.  Every level's code-equality set is validated against
    the fixed-point refinement; a disagreement raises the word bound, up to
    the orbit-graph diameter (address count when the diameter is uncomputed).
    """
    from .action import is_minimal

    model = action.model
    if window is None:
        window = default_window(action)
    window = _check_clopen_window(action, window)
    kwargs = {} if pair_cap is None else {"pair_cap": pair_cap}
    table = modulus_table(action, **kwargs)
    minimal = is_minimal(action).minimal
    diam_graph = schreier_diameter(action, size_cap=1024)
    ceiling = max(word_bound, diam_graph if diam_graph is not None else len(model))
    bound = word_bound
    budget = 20000
    hard_budget = 200000
    words = return_words(action, window, bound, perm_budget=budget)

    levels = []
    v_prev = window
    prev_family = (((), window),)
    eps_prev = None
    level = 0
    while True:
        if len(v_prev) <= 1:
            break
        if max_levels is not None and level >= max_levels:
            break
        level += 1
        if level == 1:
            eps = model.diameter(window)
            eps_prime, eps_sub = eps, False
        else:
            eps = Fraction(1, 2) * min(
                model.diameter(part) for _, part in prev_family
            )
            if eps <= 0:
                break
            eps_prime, eps_sub = _witness_or_subresolution(table, eps)
        m, base_blocks = _least_cylinder_depth(model, v_prev, eps_prime)

        # extend the partition of the level set across its translates; any
        # window remainder (non-minimal actions) is partitioned by the same
        # cylinder depth
        all_blocks = []
        covered = set()
        for word, part in (
            prev_family if level > 1 else (((), window),)
        ):
            if level == 1:
                imgs = base_blocks
            else:
                imgs = []
                perm = action.word_perm(word)
                for b in base_blocks:
                    imgs.append(
                        frozenset(
                            model.addresses[perm[model.index[a]]] for a in b
                        )
                    )
            all_blocks.extend(imgs)
            covered |= set().union(*imgs) if imgs else set()
        remainder = window - covered
        if remainder:
            all_blocks.extend(cylinder_partition(model, remainder, m))
        partition = ClopenPartition.from_blocks(model, window, all_blocks)

        include_complement = level == 1 and len(window) < len(model)
        eta = _eta_of_partition(model, partition, include_complement=include_complement)
        delta, delta_sub = _witness_or_subresolution(table, eta)

        fixed = refine_fixed_point(action, window, partition)
        target = next(b for b in fixed.blocks if action.basepoint in b)
        while True:
            v = compute_V(action, window, partition, words)
            matches_fixed_point = v == target
            if matches_fixed_point:
                family = translates(action, v, words)
                reached = set().union(*(set(p) for _, p in family))
                covers = reached == set(window)
                if covers or not minimal:
                    break
            if words.effective_bound < bound and budget < hard_budget:
                budget = min(hard_budget, budget * 4)
            elif bound < ceiling:
                bound = min(ceiling, bound * 2)
            elif matches_fixed_point:
                raise InvariantViolation(
                    f"translates fail to cover the window at level {level} "
                    f"even at the orbit-graph diameter bound {ceiling}"
                )
            else:
                raise InvariantViolation(
                    "word-bounded coding disagrees with the fixed-point "
                    f"refinement at level {level} even at the orbit-graph "
                    f"diameter bound {ceiling}"
                )
            words = return_words(action, window, bound, perm_budget=budget)

        if action.basepoint not in v:
            raise InvariantViolation("level set lost the basepoint")
        if not v <= v_prev:
            raise InvariantViolation("level sets are not nested")
        for _, part in family:
            if not model.diameter(part) < eps:
                raise InvariantViolation(
                    f"translate diameter is not below eps at level {level}"
                )
        if eps_prev is not None and not eps < eps_prev / 2:
            raise InvariantViolation("eps fails the strict halving rule")

        levels.append(
            CodingLevel(
                level,
                eps,
                eps_prime,
                eps_sub,
                eta,
                delta,
                delta_sub,
                m,
                partition,
                v,
                family,
                covers,
            )
        )
        v_prev = v
        prev_family = family
        eps_prev = eps

    return CodingChain(
        window,
        tuple(levels),
        word_bound,
        bound,
        words.effective_bound,
        len(words),
        diam_graph,
        minimal,
    )
