"""
Command-line surface for nestprover
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table
from rich.tree import Tree

from config import CORPUS_ATOMS, CORPUS_BOX_DEPTH, CORPUS_DEPTH, CORPUS_SIZE, DEFAULT_BUDGET, KRIPKE_WORLDS, NBR_WORLDS
from corpus import ENGINES, agreement, compare, generate_corpus, prove_formula, resolve_calculus
from derivations import CheckReport, Derivation, RuleTable
from descriptions import LogicSpec
from errors import DocumentError, ProverError
from formulas import parse_formula, render_formula
from labelled import (LabelledSystem, gt_rule_table, lb_check, labelled_to_lbns, lbns_rule_table, lbns_to_labelled,
                      parse_labelled, render_labelled, tl_translate)
from linear_nested import collapse_blocks, linearise, lns_check, lns_rule_table, parse_linear, render_linear
from logger import logger
from models import (Calculus, CompareReport, CorpusReport, DescriptionConfig, OutcomeDocument, ProofDocument,
                    derivation_from_document, load_proof_document, make_proof_document)
from nested import ns_check, ns_rule_table, parse_nested, render_nested
from semantics import countermodel, model_to_dict, render_model
from sequents import parse_sequent, render_sequent, sc_check, sc_rule_table

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_EXHAUSTED = 2
EXIT_INPUT = 3

_LABELLED = (Calculus.LBNS, Calculus.GTI, Calculus.GTMM, Calculus.GTE, Calculus.GTM)


class UsageError(ProverError):
    """Bad command line"""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


# --- logics, judgments and checkers -----------------------------------------

def parse_logic(text: str) -> LogicSpec:
    """mlj, e, m, preset:NAME (or a bare preset name) or desc:FILE with a DescriptionConfig"""
    key = text.strip()
    lowered = key.lower()
    if lowered == "mlj":
        return LogicSpec.intuitionistic()
    if lowered == "e":
        return LogicSpec.non_normal_e()
    if lowered == "m":
        return LogicSpec.non_normal_m()
    if lowered.startswith("desc:"):
        path = Path(key[5:])
        try:
            config = DescriptionConfig.model_validate_json(path.read_text())
        except OSError as e:
            raise UsageError(f"cannot read description {path}: {e.strerror}")
        return LogicSpec.multimodal(config.to_description(), path.stem)
    if lowered.startswith("preset:"):
        lowered = lowered[7:]
    return LogicSpec.preset(lowered)


def judgment_codec(calculus: Calculus) -> Tuple[Callable[[Any], str], Callable[[str], Any]]:
    if calculus == Calculus.SC:
        return render_sequent, parse_sequent
    if calculus == Calculus.NS:
        return render_nested, parse_nested
    if calculus == Calculus.LNS:
        return render_linear, parse_linear
    return render_labelled, parse_labelled


def check_derivation(calculus: Calculus, logic: LogicSpec, d: Derivation) -> CheckReport:
    if calculus == Calculus.SC:
        return sc_check(logic, d)
    if calculus == Calculus.NS:
        return ns_check(logic, d)
    if calculus == Calculus.LNS:
        return lns_check(logic, d)
    if calculus in _LABELLED:
        return lb_check(LabelledSystem(calculus.value), logic, d)
    raise UsageError(f"{calculus.value} is not a concrete calculus")


def rule_table(calculus: Calculus, logic: LogicSpec) -> RuleTable:
    if calculus == Calculus.SC:
        return sc_rule_table(logic)
    if calculus == Calculus.NS:
        return ns_rule_table(logic)
    if calculus == Calculus.LNS:
        return lns_rule_table(logic)
    if calculus == Calculus.LBNS:
        return lbns_rule_table(logic)
    return gt_rule_table(logic)


def decode(doc: ProofDocument) -> Tuple[LogicSpec, Derivation]:
    _, parse = judgment_codec(doc.calculus)
    return doc.logic.to_logic(), derivation_from_document(doc.derivation, parse)


def translate(doc: ProofDocument, target: str, root: str = "x") -> Tuple[Calculus, LogicSpec, Derivation]:
    logic, d = decode(doc)
    source = doc.calculus
    if source == Calculus.NS and target in ("lbns", "labelled"):
        return Calculus.LBNS, logic, tl_translate(logic, d, root)
    if source == Calculus.NS and target == "lns":
        return Calculus.LNS, logic, linearise(logic, d)
    if source == Calculus.NS and target == "sc":
        return Calculus.SC, logic, collapse_blocks(logic, linearise(logic, d))
    if source == Calculus.LNS and target == "sc":
        return Calculus.SC, logic, collapse_blocks(logic, d)
    if source == Calculus.LBNS and target == "labelled":
        return resolve_calculus(Calculus.LABELLED, logic), logic, lbns_to_labelled(logic, d)
    if source in _LABELLED and source != Calculus.LBNS and target == "lbns":
        return Calculus.LBNS, logic, labelled_to_lbns(logic, d)
    raise UsageError(f"no translation from {source.value} to {target}")


# --- the command-line client ------------------------------------------------

class NestProverCLI:
    """Runs one subcommand and reports through a rich console"""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def emit_json(self, text: str) -> None:
        self.console.out(text, highlight=False)

    def read_document(self, source: str) -> ProofDocument:
        try:
            text = sys.stdin.read() if source == "-" else Path(source).read_text()
        except OSError as e:
            raise DocumentError(f"cannot read {source}: {e.strerror}")
        return load_proof_document(text)

    def write_document(self, doc: ProofDocument, args) -> None:
        text = doc.model_dump_json(indent=2)
        if getattr(args, "output", None):
            Path(args.output).write_text(text + "\n")
        if args.format == "json":
            self.emit_json(text)
            return
        table = Table(show_header=True, header_style="bold magenta", box=box.ROUNDED)
        table.add_column("Calculus", style="cyan")
        table.add_column("Logic")
        table.add_column("Height", justify="right")
        table.add_column("Size", justify="right")
        table.add_column("Nodes", justify="right")
        meta = doc.metadata
        table.add_row(doc.calculus.value, doc.logic.name or doc.logic.kind.value, str(meta.get("height", "")),
                      str(meta.get("size", "")), str(meta.get("nodes", "")))
        self.console.print(table)
        self.console.print(self.derivation_tree(doc.derivation))

    def derivation_tree(self, node, tree: Optional[Tree] = None) -> Tree:
        label = f"[bold green]{escape(node.rule)}[/bold green]  {escape(node.conclusion)}"
        branch = Tree(label) if tree is None else tree.add(label)
        for premise in node.premises:
            self.derivation_tree(premise, branch)
        return branch

    def show_countermodel(self, logic: LogicSpec, f, args) -> int:
        found = countermodel(logic, f, args.worlds or KRIPKE_WORLDS, args.worlds or NBR_WORLDS)
        if found is None:
            if args.format == "json":
                self.emit_json('{"countermodel": null}')
            else:
                self.console.print("[yellow]No countermodel within the bounds[/yellow]")
            return EXIT_OK
        if args.format == "json":
            self.emit_json(json.dumps({"countermodel": model_to_dict(found.model), "world": found.world,
                                       "mode": found.mode.value}, indent=2))
        else:
            self.console.print(Panel(render_model(found.model), title=f"countermodel at world {found.world}",
                                     border_style="red"))
        return EXIT_REFUTED

    # subcommands

    def prove(self, args) -> int:
        logic = parse_logic(args.logic)
        f = parse_formula(args.formula)
        logic.check_formula(f)
        calculus = resolve_calculus(Calculus(args.calc), logic)
        result = prove_formula(calculus, logic, f, args.budget)
        if result.derivation is not None:
            render, _ = judgment_codec(calculus)
            self.write_document(make_proof_document(calculus, logic, result.derivation, render, result.nodes,
                                                    budget=args.budget), args)
            return EXIT_OK
        if result.exhausted:
            self.console.print(f"[yellow]Budget of {args.budget} nodes exhausted[/yellow]")
            return EXIT_EXHAUSTED
        if args.format != "json":
            self.console.print(f"[red]No {calculus.value} proof of {escape(render_formula(f))} in {logic}[/red]")
        self.show_countermodel(logic, f, args)
        return EXIT_REFUTED

    def translate(self, args) -> int:
        doc = self.read_document(args.document)
        calculus, logic, d = translate(doc, args.to, args.root)
        render, _ = judgment_codec(calculus)
        self.write_document(make_proof_document(calculus, logic, d, render, translated_from=doc.calculus.value),
                            args)
        return EXIT_OK

    def check(self, args) -> int:
        doc = self.read_document(args.document)
        logic, d = decode(doc)
        report = check_derivation(doc.calculus, logic, d)
        if report.ok:
            self.console.print(f"[green]accepted[/green] {doc.calculus.value} proof of {escape(doc.endpoint)}")
            return EXIT_OK
        logger.audit("check_failed", subject=doc.calculus.value, path=list(report.path), reason=report.reason)
        where = ".".join(str(k) for k in report.path) or "root"
        self.console.print(f"[red]rejected[/red] at {where}: {escape(report.reason)}")
        return EXIT_REFUTED

    def countermodel(self, args) -> int:
        logic = parse_logic(args.logic)
        return self.show_countermodel(logic, parse_formula(args.formula), args)

    def corpus(self, args) -> int:
        logic = parse_logic(args.logic)
        formulas = generate_corpus(logic, args.seed, args.size, args.depth, args.atoms, args.box_depth)
        report = agreement(logic, formulas, args.budget)
        doc = CorpusReport(logic=str(logic), seed=args.seed, total=report.total, proved=report.proved,
                           exhausted=report.exhausted,
                           disagreements=[self._compare_report(str(logic), c) for c in report.disagreements])
        if args.format == "json":
            self.emit_json(doc.model_dump_json(indent=2))
        else:
            table = Table(show_header=True, header_style="bold magenta", box=box.ROUNDED)
            for column in ("Logic", "Seed", "Formulas", "Proved", "Exhausted", "Disagreements"):
                table.add_column(column)
            table.add_row(doc.logic, str(doc.seed), str(doc.total), str(doc.proved), str(doc.exhausted),
                          str(len(doc.disagreements)))
            self.console.print(table)
            for c in doc.disagreements:
                self.console.print(f"[red]disagreement[/red] {escape(c.formula)}: "
                                   + ", ".join(f"{o.calculus.value}={o.status}" for o in c.outcomes))
        return EXIT_REFUTED if doc.disagreements else EXIT_OK

    def _compare_report(self, logic: str, c) -> CompareReport:
        return CompareReport(formula=render_formula(c.formula), logic=logic,
                             outcomes=[OutcomeDocument(calculus=o.calculus, status=o.status, nodes=o.nodes)
                                       for o in c.outcomes],
                             verdict=c.verdict, countermodel_found=c.countermodel_found)

    def rules_table(self, logic: LogicSpec, calculi: List[Calculus]) -> Table:
        table = Table(show_header=True, header_style="bold magenta", box=box.ROUNDED, title="Rules")
        table.add_column("Calculus", style="cyan")
        table.add_column("Rules")
        for calculus in calculi:
            rules = rule_table(calculus, logic).rules
            table.add_row(calculus.value, escape(", ".join(f"{r.name}/{r.arity}" for r in rules)))
        return table

    def compare(self, args) -> int:
        logic = parse_logic(args.logic)
        f = parse_formula(args.formula)
        calculi = list(ENGINES[:3]) + [Calculus.LBNS, Calculus.LABELLED]
        result = compare(logic, f, args.budget, calculi, oracle=True)
        doc = self._compare_report(str(logic), result)
        if args.format == "json":
            self.emit_json(doc.model_dump_json(indent=2))
        else:
            table = Table(show_header=True, header_style="bold magenta", box=box.ROUNDED,
                          title=f"{escape(doc.formula)} in {doc.logic}")
            table.add_column("Calculus", style="cyan")
            table.add_column("Status")
            table.add_column("Nodes", justify="right")
            for o in doc.outcomes:
                colour = {"proved": "green", "refuted": "red"}.get(o.status, "yellow")
                table.add_row(o.calculus.value, f"[{colour}]{o.status}[/{colour}]", str(o.nodes))
            self.console.print(table)
            oracle = "countermodel found" if doc.countermodel_found else "no countermodel within bounds"
            self.console.print(f"verdict: [bold]{doc.verdict}[/bold]; oracle: {oracle}")
            self.console.print(self.rules_table(logic, [o.calculus for o in doc.outcomes]))
        if doc.verdict == "proved":
            return EXIT_OK
        if doc.verdict == "exhausted":
            return EXIT_EXHAUSTED
        return EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="nestprover", description="Proof search and proof translation across calculi")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def common(p: argparse.ArgumentParser, logic: bool = True) -> None:
        if logic:
            p.add_argument("--logic", default="mlj", help="mlj | e | m | preset:NAME | desc:FILE")
        p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("prove", help="search for a proof")
    p.add_argument("formula")
    p.add_argument("--calc", choices=["sc", "ns", "lns", "lbns", "labelled"], default="sc")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--worlds", type=int, default=None, help="countermodel bound on refutation")
    p.add_argument("--output", help="also write the proof document to a file")
    common(p)

    p = sub.add_parser("translate", help="translate a proof document")
    p.add_argument("document", help="path, or - for stdin")
    p.add_argument("--to", choices=["lns", "sc", "lbns", "labelled"], required=True)
    p.add_argument("--root", default="x", help="root label of labelled images")
    p.add_argument("--output")
    common(p, logic=False)

    p = sub.add_parser("check", help="re-check a proof document")
    p.add_argument("document")
    common(p, logic=False)

    p = sub.add_parser("countermodel", help="search for a falsifying finite model")
    p.add_argument("formula")
    p.add_argument("--worlds", type=int, default=None)
    common(p)

    p = sub.add_parser("corpus", help="compare the engines on a seeded random corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=CORPUS_SIZE)
    p.add_argument("--depth", type=int, default=CORPUS_DEPTH)
    p.add_argument("--atoms", type=int, default=CORPUS_ATOMS)
    p.add_argument("--box-depth", type=int, default=CORPUS_BOX_DEPTH)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common(p)

    p = sub.add_parser("compare", help="prove one formula in every calculus")
    p.add_argument("formula")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common(p)
    return parser


def run(argv: List[str], console: Optional[Console] = None) -> int:
    cli = NestProverCLI(console)
    handlers: Dict[str, Callable] = {
        "prove": cli.prove,
        "translate": cli.translate,
        "check": cli.check,
        "countermodel": cli.countermodel,
        "corpus": cli.corpus,
        "compare": cli.compare,
    }
    try:
        args = build_parser().parse_args(argv)
        return handlers[args.command](args)
    except SystemExit as e:  # --help
        return e.code if isinstance(e.code, int) else EXIT_OK
    except (ProverError, ValidationError) as e:
        logger.error("input_error", error=str(e))
        cli.console.print(f"[red]Error: {escape(str(e))}[/red]")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run(sys.argv[1:]))
