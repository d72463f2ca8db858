"""Shared builders and law checks for the coding tests."""

import itertools
import random
from fractions import Fraction as F

from cantordyn.action import CantorAction, CantorModel, TreeMetric
from cantordyn.coding import return_words


def random_tree_action(seed, max_addresses=512):
    """Seeded action by random rooted-tree automorphisms on a product tree."""
    rng = random.Random(seed)
    while True:
        depth = rng.choice([3, 4, 5])
        branch = [rng.choice([2, 3, 4]) for _ in range(depth)]
        total = 1
        for b in branch:
            total *= b
        if total <= max_addresses:
            break
    addrs = tuple(itertools.product(*[range(b) for b in branch]))
    model = CantorModel(addrs, depth, TreeMetric(F(1, 2)))

    def rand_auto():
        node_perm = {}
        out = []
        for a in addrs:
            img = []
            for j in range(depth):
                key = (j, tuple(a[:j]))
                if key not in node_perm:
                    p = list(range(branch[j]))
                    rng.shuffle(p)
                    node_perm[key] = p
                img.append(node_perm[key][a[j]])
            out.append(model.index[tuple(img)])
        return tuple(out)

    gens = {f"a{i}": rand_auto() for i in range(rng.choice([2, 3]))}
    return CantorAction(model, gens, addrs[0], label=f"random-tree({seed})")


def least_cylinder_union_depth(model, subset):
    """Least j such that the subset is an exact union of depth-j cylinders."""
    subset = frozenset(subset)
    for j in range(model.depth + 1):
        keys = {model.cylinder_key(a, j) for a in subset}
        members = {
            a for a in model.addresses if model.cylinder_key(a, j) in keys
        }
        if members == subset:
            return j
    return None


def check_coding_laws(action, chain_result, *, rng=None, tree_model=True):
    """Fixset, translate partition, equivariance, local constancy, nesting.

    Raises AssertionError on any violation; returns the number of checks.
    """
    model = action.model
    window = chain_result.window
    words = return_words(action, window, chain_result.word_bound_used)
    checks = 0
    prev_v = window
    prev_eps = None
    for lv in chain_result.levels:
        v = lv.v
        v_idx = [model.index[a] for a in sorted(v, key=lambda a: model.index[a])]

        # fixset law, exhaustively over the enumerated words
        for word, perm in zip(words.words, words.perms):
            img = frozenset(model.addresses[int(perm[i])] for i in v_idx)
            assert not (img & v) or img == v, (
                f"fixset law fails at level {lv.level} under {word}"
            )
            checks += 1

        # translates pairwise disjoint; cover the window when minimal
        seen = set()
        for _, part in lv.translate_family:
            assert not (part & seen), "translates overlap"
            seen |= part
            checks += 1
        if chain_result.minimal:
            assert seen == set(window), "translates fail to cover the window"

        # local constancy: level set and translates are cylinder unions
        for s in [v] + [p for _, p in lv.translate_family]:
            j = least_cylinder_union_depth(model, s)
            assert j is not None and j <= model.depth
            if tree_model:
                assert j <= lv.cylinder_depth, (
                    "level set is not locally constant at the partition scale"
                )
            checks += 1

        # code equivariance through a translating return word: the code of a
        # translated point under a word equals the code of the original point
        # under the concatenated word
        if rng is not None:
            partition = lv.partition
            block_id = {a: partition.block_index(a) for a in window}
            win = sorted(window, key=lambda a: model.index[a])
            done = 0
            attempts = 0
            while done < 20 and attempts < 400:
                attempts += 1
                u = win[rng.randrange(len(win))]
                gi = rng.randrange(len(words.words))
                hi = rng.randrange(len(words.words))
                gperm = words.perms[gi]
                hperm = words.perms[hi]
                u2 = model.addresses[int(gperm[model.index[u]])]
                w2 = model.addresses[int(gperm[model.index[action.basepoint]])]
                if u2 not in window:
                    continue
                if model.addresses[int(hperm[model.index[w2]])] not in window:
                    continue
                img = model.addresses[int(hperm[model.index[u2]])]
                lhs = block_id.get(img, 0)
                composed = action.word_perm(words.words[hi] + words.words[gi])
                rhs = block_id.get(model.addresses[composed[model.index[u]]], 0)
                assert lhs == rhs, "code equivariance fails"
                checks += 1
                done += 1

        # nesting and strict halving
        assert v <= prev_v
        assert action.basepoint in v
        for _, part in lv.translate_family:
            assert model.diameter(part) < lv.eps
            checks += 1
        if prev_eps is not None:
            assert lv.eps < prev_eps / 2
        prev_v = v
        prev_eps = lv.eps
    return checks
