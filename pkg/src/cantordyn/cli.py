"""Command dispatch: classify, compare, code, holonomy, measure.

Every command reads a config file, runs exact computations, and emits a
deterministic structured report.  Negative mathematical verdicts are
successful runs (exit 0); parse and semantic errors exit 2, resource caps
exit 3, and internal invariant violations exit 4.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import __version__
from .action import (
    COLLAPSED,
    DEFAULT_PAIR_CAP,
    format_word,
    germinal_holonomy,
    invariant_measure,
    is_distal,
    is_minimal,
    modulus_table,
    parse_word,
    pushforward_invariant,
)
from .affine import is_normal, normal_core
from .coding import coding_chain, return_words
from .config import format_fraction, parse_config
from .errors import CantordynError, StructureError
from .report import Report
from .tower import boundary_action, build_tower, interleave, mccord_verdict, subgroup_cylinder

MODULUS_HEAD_TAIL = 5


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise StructureError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def _apply_overrides(cfg, args):
    updates = {}
    if getattr(args, "depth", None) is not None:
        updates["depth"] = args.depth
    if getattr(args, "words", None) is not None:
        updates["words"] = args.words
    if getattr(args, "lam", None) is not None:
        try:
            lam = Fraction(args.lam.replace(" ", ""))
        except (ValueError, ZeroDivisionError) as exc:
            raise StructureError(f"--lambda: not a fraction: {args.lam!r}") from exc
        if not 0 < lam < 1:
            raise StructureError("--lambda must lie in (0,1)")
        updates["lam"] = lam
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if not updates:
        return cfg
    from dataclasses import replace

    return replace(cfg, **updates)


def _params_section(report, cfg, depth):
    report.section("parameters")
    report.add("depth", depth, 1)
    report.add("words", cfg.words, 1)
    report.add("lambda", cfg.lam, 1)
    report.add("seed", cfg.seed, 1)


def _address_str(model, address):
    if address == COLLAPSED:
        return COLLAPSED
    if (
        isinstance(address, tuple)
        and len(address) == 2
        and isinstance(address[0], tuple)
        and isinstance(address[1], tuple)
    ):
        x = "".join(str(d) for d in address[0])
        y = "".join(str(d) for d in address[1])
        return f"{x}:{y}"
    return ".".join(str(c) for c in address)


def _parse_address(action, text):
    text = text.strip()
    for a in action.model.addresses:
        if _address_str(action.model, a) == text:
            return a
    raise StructureError(f"address {text!r} is not in the model")


def _chain_for(cfg):
    chain = cfg.build_chain()
    depth = cfg.depth if cfg.depth is not None else chain.depth
    return chain.truncate(depth), depth


def _modulus_section(report, table, depth_used):
    report.section("modulus")
    report.add("depth_used", depth_used, 1)
    report.add("rows", len(table.rows), 1)
    rows = table.rows
    head = rows[:MODULUS_HEAD_TAIL]
    tail = rows[-MODULUS_HEAD_TAIL:] if len(rows) > MODULUS_HEAD_TAIL else ()
    report.section("head", 1)
    for r, k in head:
        report.add(f"r {format_fraction(r)}", f"kappa {format_fraction(k)}", 2)
    if tail and len(rows) > 2 * MODULUS_HEAD_TAIL:
        report.section("tail", 1)
        for r, k in tail:
            report.add(f"r {format_fraction(r)}", f"kappa {format_fraction(k)}", 2)
    report.add("kappa_equals_r_on_all_rows", table.is_exact_isometry_table(), 1)


def _dynamics_sections(report, action, cfg, *, pair_action=None, pair_depth=None):
    """Minimality and measure at full depth; pairwise tables possibly at a
    reduced depth that fits the pairwise cap, reported as depth_used."""
    if pair_action is None:
        pair_action = action
        pair_depth = action.model.depth
    minimal = is_minimal(action)
    report.section("minimality")
    report.add("minimal", minimal.minimal, 1)
    if not minimal.minimal:
        orbit = sorted(
            minimal.witness_orbit, key=lambda a: action.model.index[a]
        )
        report.add("witness_orbit_size", len(orbit), 1)
        report.add(
            "witness_orbit",
            [_address_str(action.model, a) for a in orbit[:10]],
            1,
        )

    table = modulus_table(pair_action)
    _modulus_section(report, table, pair_depth)

    distal = is_distal(pair_action, cfg.words, keep_pairs=False)
    report.section("distality")
    report.add("depth_used", pair_depth, 1)
    report.add("distal", distal.distal, 1)
    report.add("word_bound", distal.word_length, 1)
    report.add("word_classes", distal.word_count, 1)
    report.add("min_delta", distal.min_delta, 1)

    mu = invariant_measure(action)
    report.section("measure")
    report.add("support", mu.support_label, 1)
    weights = {w for _, w in mu.weights}
    if len(weights) == 1:
        report.add("weight", next(iter(weights)), 1)
    else:
        report.add("weights", len(mu.weights), 1)
    report.add("pushforward_invariant", pushforward_invariant(action, mu), 1)
    return minimal


def _pairwise_depth(chain, depth, cap=DEFAULT_PAIR_CAP):
    """Deepest level whose coset count fits the pairwise cap."""
    best = None
    for l in range(1, depth + 1):
        if chain.group.index_of(chain.levels[l - 1]) <= cap:
            best = l
    if best is None:
        raise StructureError(
            "no chain level fits the pairwise cap; nothing to analyze"
        )
    return best


def cmd_classify(cfg, report):
    if cfg.kind == "chain":
        chain, depth = _chain_for(cfg)
        report.section("chain")
        report.add("label", chain.label, 1)
        report.add("levels", depth, 1)
        report.add("indices", chain.indices(), 1)

        action = boundary_action(chain, depth, lam=cfg.lam)
        pair_depth = _pairwise_depth(chain, depth)
        pair_action = (
            action
            if pair_depth == depth
            else boundary_action(chain, pair_depth, lam=cfg.lam)
        )
        _dynamics_sections(
            report, action, cfg, pair_action=pair_action, pair_depth=pair_depth
        )

        report.section("normality")
        for l, h in enumerate(chain.levels, start=1):
            verdict = is_normal(chain.group, h)
            if verdict.normal:
                report.add(f"level {l}", "normal true", 1)
            else:
                report.add(
                    f"level {l}",
                    f"normal false witness {verdict.witness_name} {verdict.witness}",
                    1,
                )

        verdict = mccord_verdict(chain)
        report.section("mccord")
        for rec in verdict.records:
            if rec.cofinal:
                report.add(
                    f"level {rec.level}",
                    f"cofinal_at {rec.cofinal_at} core_index "
                    f"{chain.group.index_of(rec.core)}",
                    1,
                )
            else:
                report.add(
                    f"level {rec.level}",
                    f"fail witness {rec.witness} core_index "
                    f"{chain.group.index_of(rec.core)}",
                    1,
                )
        report.add("compatible_up_to_depth", verdict.compatible, 1)
    else:
        action = cfg.build_action()
        report.section("action")
        report.add("label", action.label, 1)
        report.add("addresses", len(action.model), 1)
        report.add("generators", list(action.generators), 1)
        _dynamics_sections(report, action, cfg)
        report.section("chain_sections")
        report.add("available", False, 1)
    return report


def cmd_compare(cfg_a, cfg_b, report):
    chain_a, depth_a = _chain_for(cfg_a)
    chain_b, depth_b = _chain_for(cfg_b)
    report.section("chains")
    report.add("a", f"{chain_a.label} depth {depth_a}", 1)
    report.add("b", f"{chain_b.label} depth {depth_b}", 1)
    verdict = interleave(chain_a, chain_b)
    report.section("interleaving")
    report.add("success", verdict.success, 1)
    if verdict.success:
        report.add("map_a_to_b", verdict.map_ab, 1)
        report.add("map_b_to_a", verdict.map_ba, 1)
    else:
        report.add("fail_side", verdict.fail_side, 1)
        report.add("fail_level", verdict.fail_level, 1)
        report.add("witness", verdict.witness, 1)
    return report


def cmd_code(cfg, report):
    if cfg.kind == "chain":
        chain, depth = _chain_for(cfg)
        action = boundary_action(chain, depth, lam=cfg.lam)
        tower = build_tower(chain, depth)
    else:
        action = cfg.build_action()
        tower = None
    chain_result = coding_chain(action, word_bound=cfg.words)
    report.section("window")
    report.add("size", len(chain_result.window), 1)
    report.add("minimal_action", chain_result.minimal, 1)
    report.add("word_bound_requested", chain_result.word_bound_requested, 1)
    report.add("word_bound_used", chain_result.word_bound_used, 1)
    report.add("word_bound_effective", chain_result.word_bound_effective, 1)
    report.add("return_word_classes", chain_result.return_word_count, 1)
    words = return_words(action, chain_result.window, chain_result.word_bound_used)
    report.add(
        "return_words_head",
        [format_word(w) for w in words.words[:6]],
        1,
    )
    report.add("schreier_diameter", chain_result.schreier_diam, 1)
    report.section("levels")
    for lv in chain_result.levels:
        report.section(f"level {lv.level}", 1)
        report.add("eps", lv.eps, 2)
        report.add("eps_prime", lv.eps_prime, 2)
        report.add("eps_prime_sub_resolution", lv.eps_prime_sub_resolution, 2)
        report.add("eta", lv.eta, 2)
        report.add("delta", lv.delta, 2)
        report.add("delta_sub_resolution", lv.delta_sub_resolution, 2)
        report.add("cylinder_depth", lv.cylinder_depth, 2)
        report.add("blocks", len(lv.partition), 2)
        report.add("v_size", len(lv.v), 2)
        report.add("translates", len(lv.translate_family), 2)
        report.add("covers_window", lv.covers_window, 2)
        report.add(
            "first_translate_words",
            [format_word(w) for w, _ in lv.translate_family[:4]],
            2,
        )
    if tower is not None:
        report.section("core_oracle")
        for lv in chain_result.levels:
            core = normal_core(chain.group, chain.levels[lv.cylinder_depth - 1])
            cyl = subgroup_cylinder(tower, core)
            report.add(
                f"level {lv.level}",
                f"core_of_chain_level {lv.cylinder_depth} cylinder_size "
                f"{len(cyl)} match {'true' if cyl == lv.v else 'false'}",
                1,
            )
    return report


def cmd_holonomy(cfg, word_text, address_text, report):
    if cfg.kind == "chain":
        chain, depth = _chain_for(cfg)
        action = boundary_action(chain, depth, lam=cfg.lam)
    else:
        action = cfg.build_action()
    word = parse_word(word_text)
    address = _parse_address(action, address_text)
    verdict = germinal_holonomy(action, word, address)
    report.section("holonomy")
    report.add("word", format_word(word), 1)
    report.add("address", _address_str(action.model, address), 1)
    if verdict.trivial:
        report.add("germ", f"trivial_at_depth {verdict.depth}", 1)
    else:
        report.add("germ", f"nontrivial_through_depth {verdict.depth}", 1)
        a, b = verdict.witness
        report.add(
            "deepest_disagreement",
            f"{_address_str(action.model, a)} -> {_address_str(action.model, b)}",
            1,
        )
    return report


def cmd_measure(cfg, report):
    if cfg.kind == "chain":
        chain, depth = _chain_for(cfg)
        action = boundary_action(chain, depth, lam=cfg.lam)
    else:
        action = cfg.build_action()
    mu = invariant_measure(action)
    report.section("measure")
    report.add("support", mu.support_label, 1)
    report.add("addresses", len(mu.weights), 1)
    weights = {w for _, w in mu.weights}
    if len(weights) == 1:
        report.add("weight", next(iter(weights)), 1)
    for name in action.generators:
        single = CantorActionView(action, name)
        report.add(
            f"invariant_under {name}",
            pushforward_invariant(single, mu),
            1,
        )
    report.add("pushforward_invariant_all", pushforward_invariant(action, mu), 1)
    return report


class CantorActionView:
    """A one-generator view of an action, for per-generator verification."""

    def __init__(self, action, name):
        self._action = action
        self._name = name
        self.model = action.model

    def signed_tokens(self):
        return [(self._name, 1), (self._name, -1)]

    def token_perm(self, name, sign):
        return self._action.token_perm(name, sign)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cantordyn",
        description="Exact classification of subgroup-chain towers and "
        "finite-depth Cantor dynamics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--depth", type=int, default=None, help="truncation depth K")
        p.add_argument("--words", type=int, default=None, help="word length bound L")
        p.add_argument("--lambda", dest="lam", default=None, help="tree metric base p/q")
        p.add_argument("--seed", type=int, default=None, help="seed echoed in reports")
        p.add_argument("--out", default=None, help="write the report to a file")

    p = sub.add_parser("classify", help="minimality, modulus, measures, normality, cofinality")
    p.add_argument("config")
    common(p)
    p = sub.add_parser("compare", help="chain interleaving verdict")
    p.add_argument("config_a")
    p.add_argument("config_b")
    common(p)
    p = sub.add_parser("code", help="orbit-coding refinement chain")
    p.add_argument("config")
    common(p)
    p = sub.add_parser("holonomy", help="germ depth of a stabilizing word")
    p.add_argument("config")
    p.add_argument("--word", required=True)
    p.add_argument("--at", required=True, dest="address")
    common(p)
    p = sub.add_parser("measure", help="invariant measure with exact verification")
    p.add_argument("config")
    common(p)
    return parser


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    report = Report(__version__, args.command)

    if args.command == "compare":
        cfg_a = _apply_overrides(_load_config(args.config_a), args)
        cfg_b = _apply_overrides(_load_config(args.config_b), args)
        report.add("config_a", args.config_a)
        report.add("config_b", args.config_b)
        _params_section(report, cfg_a, cfg_a.depth)
        cmd_compare(cfg_a, cfg_b, report)
    else:
        cfg = _apply_overrides(_load_config(args.config), args)
        report.add("config", args.config)
        depth = cfg.depth
        if cfg.kind == "chain" and depth is None:
            depth = cfg.build_chain().depth
        _params_section(report, cfg, depth)
        if args.command == "classify":
            cmd_classify(cfg, report)
        elif args.command == "code":
            cmd_code(cfg, report)
        elif args.command == "holonomy":
            cmd_holonomy(cfg, args.word, args.address, report)
        elif args.command == "measure":
            cmd_measure(cfg, report)

    elapsed_ms = (time.monotonic() - started) * 1000
    text = report.render(timing_ms=elapsed_ms)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except CantordynError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
