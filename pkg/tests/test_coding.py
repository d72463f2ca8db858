"""Return words, coding functions, level sets, translates, and refinement."""

import random
from fractions import Fraction as F

import pytest

from cantordyn.action import CantorAction, CantorModel, TreeMetric, format_word, parse_word
from cantordyn.affine import normal_core
from cantordyn.coding import (
    ClopenPartition,
    code,
    coding_chain,
    compute_V,
    cylinder_partition,
    default_window,
    refine_fixed_point,
    return_words,
    schreier_diameter,
    translates,
)
from cantordyn.errors import InvariantViolation, StructureError
from cantordyn.gallery import (
    fokkink_oversteegen,
    small_fo_variant,
    vietoris,
    warp_example,
)
from cantordyn.tower import boundary_action, build_tower, subgroup_cylinder
from helpers import check_coding_laws, least_cylinder_union_depth, random_tree_action


def dyadic_setup():
    action = boundary_action(vietoris(2, 3))
    window = default_window(action)
    words = return_words(action, window, 4)
    blocks = cylinder_partition(action.model, window, 2)
    partition = ClopenPartition.from_blocks(action.model, window, blocks)
    return action, window, words, partition


def identity_only_action():
    model = CantorModel(((0, 0), (0, 1), (1, 0), (1, 1)), 2, TreeMetric(F(1, 2)))
    n = len(model)
    return CantorAction(model, {"e": tuple(range(n))}, (0, 0))


# ------------------------------------------------------------- return words

def test_identity_only_action_has_only_the_empty_class():
    action = identity_only_action()
    window = frozenset(action.model.cylinder_members(action.basepoint, 1))
    rws = return_words(action, window, 5)
    assert rws.words == ((),)


def test_dyadic_return_word_classes_at_length_four():
    action, window, words, _ = dyadic_setup()
    assert len(words) == 4
    rendered = {format_word(w) for w in words.words}
    assert rendered == {"<empty>", "t*t", "t^-1*t^-1", "t*t*t*t"}


def test_whole_space_window_admits_all_word_classes():
    action = boundary_action(vietoris(2, 3))
    window = frozenset(action.model.addresses)
    rws = return_words(action, window, 8)
    assert len(rws) == 8  # all elements of the induced cyclic group


def test_return_words_verified_by_action():
    action, window, words, _ = dyadic_setup()
    for w in words.words:
        assert action.act(w, action.basepoint) in window


# -------------------------------------------------------------------- codes

def test_code_of_basepoint_under_return_words_is_nonzero():
    action, window, words, partition = dyadic_setup()
    for w in words.words:
        assert code(action, window, partition, action.basepoint, w) != 0


def test_code_example_lands_in_block_one():
    action, window, words, partition = dyadic_setup()
    u = (0, 2, 2)  # the address of 2 mod 8
    assert code(action, window, partition, u, parse_word("t*t")) == 1


def test_code_zero_when_image_leaves_window():
    action, window, _, partition = dyadic_setup()
    assert code(action, window, partition, (0, 0, 0), parse_word("t")) == 0


def test_code_requires_point_in_window():
    action, window, _, partition = dyadic_setup()
    with pytest.raises(StructureError):
        code(action, window, partition, (1, 1, 1), ())


# ---------------------------------------------------------------- compute_V

def test_dyadic_level_set_is_the_next_cylinder():
    action, window, words, partition = dyadic_setup()
    v = compute_V(action, window, partition, words)
    assert v == frozenset({(0, 0, 0), (0, 0, 4)})


def test_single_invariant_block_gives_whole_window():
    action = boundary_action(vietoris(2, 3))
    window = frozenset(action.model.addresses)
    words = return_words(action, window, 8)
    partition = ClopenPartition.from_blocks(action.model, window, [window])
    assert compute_V(action, window, partition, words) == window


def test_fo_level_set_matches_core_cylinder_via_cross_module_oracle():
    chain = fokkink_oversteegen(1)
    tower = build_tower(chain)
    action = boundary_action(chain)
    cc = coding_chain(action)
    assert len(cc.levels) == 1
    lv = cc.levels[0]
    core = normal_core(chain.group, chain.levels[lv.cylinder_depth - 1])
    assert subgroup_cylinder(tower, core) == lv.v
    # the translates tile the window: address count over the block size
    assert len(lv.translate_family) == 105 // len(lv.v)


# --------------------------------------------------------------- translates

def test_dyadic_translates_are_the_two_cosets():
    action, window, words, partition = dyadic_setup()
    v = compute_V(action, window, partition, words)
    family = translates(action, v, words)
    assert [sorted(p) for _, p in family] == [
        [(0, 0, 0), (0, 0, 4)],
        [(0, 2, 2), (0, 2, 6)],
    ]
    assert family[0][0] == ()
    assert format_word(family[1][0]) == "t*t"


def test_invariant_window_has_a_single_translate():
    action = boundary_action(vietoris(2, 3))
    window = frozenset(action.model.addresses)
    words = return_words(action, window, 8)
    partition = ClopenPartition.from_blocks(action.model, window, [window])
    v = compute_V(action, window, partition, words)
    family = translates(action, v, words)
    assert len(family) == 1


def test_translate_overlap_without_equality_is_a_hard_error():
    # a hand-built non-equivariant "V": half of one coset and half of another
    action, window, words, _ = dyadic_setup()
    bogus = frozenset({(0, 0, 0), (0, 2, 2)})
    with pytest.raises(InvariantViolation):
        translates(action, bogus, words)


# --------------------------------------------------------------- fixed point

def test_fixed_point_agrees_with_word_bounded_level_set():
    action, window, words, partition = dyadic_setup()
    fixed = refine_fixed_point(action, window, partition)
    v = compute_V(action, window, partition, words)
    block = next(b for b in fixed.blocks if action.basepoint in b)
    assert block == v


def test_fixed_point_leaves_invariant_single_block_unchanged():
    action = boundary_action(vietoris(2, 3))
    window = frozenset(action.model.addresses)
    partition = ClopenPartition.from_blocks(action.model, window, [window])
    fixed = refine_fixed_point(action, window, partition)
    assert fixed.blocks == (window,)


def test_fixed_point_agreement_at_schreier_diameter_on_random_actions():
    for seed in range(8):
        action = random_tree_action(seed, max_addresses=128)
        window = default_window(action)
        diam = schreier_diameter(action)
        words = return_words(action, window, diam)
        blocks = cylinder_partition(action.model, window, 2)
        partition = ClopenPartition.from_blocks(action.model, window, blocks)
        fixed = refine_fixed_point(action, window, partition)
        block = next(b for b in fixed.blocks if action.basepoint in b)
        assert compute_V(action, window, partition, words) == block


# -------------------------------------------------------------- coding chain

def test_dyadic_chain_levels_and_constants():
    action = boundary_action(vietoris(2, 3))
    cc = coding_chain(action)
    assert len(cc.levels) == 2
    l1, l2 = cc.levels
    assert l1.v == frozenset({(0, 0, 0), (0, 0, 4)})
    assert l2.v == frozenset({(0, 0, 0)})
    assert l1.eps == F(1, 2)
    assert l2.eps == F(1, 8)
    assert l2.eps < l1.eps / 2
    assert l1.cylinder_depth == 2 and l2.cylinder_depth == 3


def test_singleton_window_gives_empty_chain():
    action = boundary_action(vietoris(2, 3))
    cc = coding_chain(action, window=frozenset({action.basepoint}))
    assert cc.levels == ()


def test_chain_levels_match_core_cylinders_per_partition_depth():
    for chain in (vietoris(2, 4), small_fo_variant(3)):
        tower = build_tower(chain)
        action = boundary_action(chain)
        cc = coding_chain(action)
        assert cc.levels, "expected at least one coding level"
        for lv in cc.levels:
            core = normal_core(chain.group, chain.levels[lv.cylinder_depth - 1])
            assert subgroup_cylinder(tower, core) == lv.v


def test_coding_laws_on_gallery_actions():
    rng = random.Random(17)
    actions = [
        boundary_action(vietoris(2, 3)),
        boundary_action(vietoris(3, 2)),
        boundary_action(small_fo_variant(2)),
        warp_example(2, 2),
        warp_example(2, 2, include_free_factor=False),
    ]
    for action in actions:
        cc = coding_chain(action)
        tree = not action.label.startswith("warp")
        assert check_coding_laws(action, cc, rng=rng, tree_model=tree) > 0


def test_coding_laws_on_random_tree_actions():
    rng = random.Random(23)
    for seed in range(6):
        action = random_tree_action(seed, max_addresses=256)
        cc = coding_chain(action)
        assert check_coding_laws(action, cc, rng=rng) > 0


def test_chain_reports_graph_diameter_on_small_models():
    action = boundary_action(vietoris(2, 3))
    cc = coding_chain(action)
    assert cc.schreier_diam == 4  # the 8-cycle


def test_graph_diameter_of_disconnected_action_is_component_maximum():
    action = warp_example(2, 1, include_free_factor=False)
    # orbits are the 4-cycles inside each fiber plus the fixed point
    assert schreier_diameter(action) == 2


def test_partition_construction_rejects_bad_blocks():
    action = boundary_action(vietoris(2, 3))
    window = default_window(action)
    with pytest.raises(StructureError):
        ClopenPartition.from_blocks(
            action.model, window, [window, {(0, 0, 0)}]
        )
    with pytest.raises(StructureError):
        ClopenPartition.from_blocks(action.model, window, [{(0, 0, 0)}])


def test_local_constancy_depth_bounded_by_partition_scale():
    action = boundary_action(vietoris(2, 4))
    cc = coding_chain(action)
    for lv in cc.levels:
        j = least_cylinder_union_depth(action.model, lv.v)
        assert j is not None and j <= lv.cylinder_depth
