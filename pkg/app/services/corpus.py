"""
Corpus programs

The choice proofs as executable programs, witness extraction from their streams, and the
loading and checking of .dlpaw files.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from config import settings
from app.core.exceptions import MachineError, ParseError
from app.core.names import fresh, substitute
from app.core.parser import CheckItem, Definition, RunItem, SourceFile, parse, parse_file
from app.core.pretty import pretty
from app.models.syntax import (
    Binding, Closure, CoVar, Cut, DPair, DestC, Node, PVar, Sort, Store, TVar, numeral,
    numeral_value,
)
from app.schemas.reports import CheckReport, ChoiceReport, Diagnostic, DefinitionReport
from app.services.machine import BigStepMachine, Outcome, run_nef
from app.services.macros import expand
from app.services.smallstep import SmallStepMachine
from app.services.typecheck import TypingContext, check_definition

logger = logging.getLogger(__name__)


# Relations P(x, y) the choice proofs are instantiated with
IDENTITY = "x = y"
SUCCESSOR = "S(x) = y"
ANY = "y = y"

# Realizers of ∀x∃y P(x, y) for each relation
REALIZERS = {
    IDENTITY: "lam x. [x, refl]",
    SUCCESSOR: "lam x. [S(x), refl]",
    ANY: "lam x. [0, refl]",
}


def _relation(relation: str, x: str, y: str) -> str:
    return relation.replace("x", "\0").replace("y", y).replace("\0", x)


def hypothesis_type(relation: str = IDENTITY) -> Node:
    """∀x^ℕ ∃y^ℕ P(x, y)"""
    return parse(f"forall x : nat. exists y : nat. {relation}", "formula")


def ac_type(relation: str = IDENTITY) -> Node:
    """∀x∃y P(x, y) → ∃f^{ℕ→ℕ} ∀x P(x, f(x))"""
    body = _relation(relation, "x", "f x")
    return parse(f"(forall x : nat. exists y : nat. {relation}) -> exists f : nat -> nat. forall x : nat. {body}", "formula")


def dc_type(relation: str = SUCCESSOR) -> Node:
    """∀x∃y P(x, y) → ∀x0 ∃f (f(0) = x0 ∧ ∀n P(f(n), f(S(n))))"""
    step = _relation(relation, "f n", "f S(n)")
    return parse(
        f"(forall x : nat. exists y : nat. {relation})"
        f" -> forall x0 : nat. exists f : nat -> nat. f 0 = x0 /\\ forall n : nat. {step}",
        "formula",
    )


def realizer(relation: str = IDENTITY) -> Node:
    return parse(REALIZERS[relation], "proof")


# Programs (extended proofs, expanded before checking or running)

def nth_acn(n: Node, stream: Node) -> Node:
    """π1(ind(n; a; (c,x). π2(c))): the n-th answer stored in an AC stream"""
    return _with_index(parse("pi1(fix(n; a; (c, x). pi2(c)))", "proof", defs={"a": stream}, scope={"n": Sort.TERM}), n)


def nth_dc(n: Node, start: Node) -> Node:
    """ind(n; s; (d,x). [wit(prf d), π2(prf(prf d))]): the n-th point of a DC stream with its tail"""
    text = "fix(n; s; (d, x). [wit (prf d), pi2(prf (prf d))])"
    return _with_index(parse(text, "proof", defs={"s": start}, scope={"n": Sort.TERM}), n)


def stream_acn(h: Node) -> Node:
    """cofix(0; (b,n). (H n, b S(n))): the lazily computed answers of H"""
    return parse("cofix(0; (b, n). (H n, b S(n)))", "proof", defs={"H": h})


def stream_dc(h: Node, x0: Node) -> Node:
    """cofix(x0; (b,x). dest H x as (y,c) in [y, (c, b y)]): the orbit of x0 under H"""
    proof = parse("cofix(x0; (b, x). dest H x as (y, c) in [y, (c, b y)])", "proof", defs={"H": h}, scope={"x0": Sort.TERM})
    return substitute(proof, {(Sort.TERM, "x0"): x0})


def _with_index(proof: Node, n: Node) -> Node:
    return substitute(proof, {(Sort.TERM, "n"): n})


def ac_n() -> Node:
    """λH. let a = stream(H) in [λn. wit(nth n a), λn. prf(nth n a)]"""
    return parse(
        "fun H. let a = cofix(0; (b, n). (H n, b S(n))) in"
        " [lam n. wit pi1(fix(n; a; (c, x). pi2(c))), lam n. prf pi1(fix(n; a; (c, x). pi2(c)))]",
        "proof",
    )


def dc() -> Node:
    """
    λH.λx0. let a = orbit(H, x0) in let s = [x0, a] in
    [λn. wit(nth n s), (refl, λn. π1(prf(prf(nth n s))))]
    """
    nth = "fix(n; s; (d, x). [wit (prf d), pi2(prf (prf d))])"
    return parse(
        "fun H. lam x0. let a = cofix(x0; (b, x). dest H x as (y, c) in [y, (c, b y)]) in"
        f" let s = [x0, a] in [lam n. wit {nth}, (refl, lam n. pi1(prf (prf {nth})))]",
        "proof",
    )


# Witness extraction

class ChoiceExtractor:
    """
    Reads f(n) off the stream of a choice proof

    The stream is placed in the store unevaluated, and the n-th cell is forced by a query
    ⟨nth n a ‖ dest~(x,c).⟨[x,c]‖α0⟩⟩. The number of cofix unfoldings is recorded; querying
    every index up to n again on the resulting store shows which cells were shared.

    Args:
        machine: "big" or "small"
        fuel: Step budget of each query
    """

    def __init__(self, machine: Optional[str] = None, fuel: Optional[int] = None):
        self.machine = machine or settings.DEFAULT_MACHINE
        if self.machine not in ("big", "small"):
            raise ValueError(f"unknown machine {self.machine!r}")
        self.fuel = settings.FUEL if fuel is None else fuel

    def _query(self, proof: Node, store: Store) -> Tuple[Node, Store, int, int]:
        """Run the query; returns (witness, final store, cofix unfoldings, steps)"""
        x, c, out = "x", "c", fresh("alpha0", {b.name for b in store})
        cl = Closure(Cut(expand(proof), DestC(x, c, Cut(DPair(TVar(x), PVar(c)), CoVar(out)))), store)
        runner = BigStepMachine(self.fuel) if self.machine == "big" else SmallStepMachine(self.fuel)
        outcome = runner.run(cl)
        cmd = outcome.closure.cmd
        if outcome.kind is not Outcome.NORMAL or not isinstance(cmd, Cut) or not isinstance(cmd.proof, DPair):
            raise MachineError(f"witness query ended {outcome.kind.value}: {outcome.reason or pretty(cmd)}")
        return cmd.proof.witness, outcome.closure.store, runner.stats["cofix-unfold"], outcome.steps

    def _report(self, program: str, n: int, x0: Optional[int], nth, store: Store) -> ChoiceReport:
        witness, store, unfoldings, steps = self._query(nth(numeral(n)), store)
        again = 0
        for k in range(n + 1):
            _, store, extra, _ = self._query(nth(numeral(k)), store)
            again += extra
        logger.info(f"{program} f({n}) = {pretty(witness)} with {unfoldings} unfoldings ({again} on re-query)")
        return ChoiceReport(
            program=program, machine=self.machine, n=n, x0=x0,
            value=numeral_value(witness), term=pretty(witness),
            unfoldings=unfoldings, steps=steps, requery_unfoldings=again,
        )

    def choice(self, n: int, h: Optional[Node] = None) -> ChoiceReport:
        """f(n) for f := λn. wit(nth n a) with a the stream of H"""
        h = realizer(IDENTITY) if h is None else h
        store = (Binding("a", Sort.PROOF, expand(stream_acn(h))),)
        return self._report("acn", n, None, lambda k: nth_acn(k, PVar("a")), store)

    def dependent_choice(self, n: int, x0: int = 0, h: Optional[Node] = None) -> ChoiceReport:
        """f(n) for f := λn. wit(nth n [x0, a]) with a the orbit of x0"""
        h = realizer(SUCCESSOR) if h is None else h
        start = numeral(x0)
        store = (
            Binding("a", Sort.PROOF, expand(stream_dc(h, start))),
            Binding("s", Sort.PROOF, DPair(start, PVar("a"))),
        )
        return self._report("dc", n, x0, lambda k: nth_dc(k, PVar("s")), store)


def extract_choice(n: int, h: Optional[Node] = None, machine: Optional[str] = None, fuel: Optional[int] = None) -> ChoiceReport:
    return ChoiceExtractor(machine, fuel).choice(n, h)


def extract_dc(n: int, x0: int = 0, h: Optional[Node] = None, machine: Optional[str] = None, fuel: Optional[int] = None) -> ChoiceReport:
    return ChoiceExtractor(machine, fuel).dependent_choice(n, x0, h)


def oracle(n: int, h: Optional[Node] = None) -> Optional[int]:
    """wit(H n) computed directly, without a stream"""
    h = realizer(IDENTITY) if h is None else h
    value, _ = run_nef(_apply(h, n))
    if isinstance(value, DPair):
        return numeral_value(value.witness)
    return None


def _apply(h: Node, n: int) -> Node:
    return expand(substitute(parse("H n", "proof", defs={"H": h}, scope={"n": Sort.TERM}), {(Sort.TERM, "n"): numeral(n)}))


# Files

def corpus_files(directory: Optional[str] = None) -> List[Path]:
    return sorted(Path(directory or settings.CORPUS_DIR).glob("*.dlpaw"))


def load(path: Path, inline: bool = False) -> SourceFile:
    """Parse a corpus file; raises ParseError on malformed text"""
    return parse_file(Path(path).read_text(), inline)


def check_source(source: SourceFile, file: str = "<input>") -> CheckReport:
    """
    Check every definition and check item

    Earlier definitions are hypotheses of later items, at their declared formulas, so a
    failing definition does not hide errors further down.
    """
    ctx = TypingContext()
    reports: List[DefinitionReport] = []
    for index, item in enumerate(source.items):
        if isinstance(item, Definition):
            reports.append(check_definition(item.name, item.proof, item.formula, ctx))
            ctx = ctx.extend(Sort.PROOF, item.name, item.formula)
        elif isinstance(item, CheckItem):
            reports.append(check_definition(f"check#{index}", item.proof, item.formula, ctx))
    return CheckReport(file=file, definitions=reports, diagnostics=source.errors)


def check_file(path: Path) -> CheckReport:
    try:
        source = load(path)
    except ParseError as e:
        return CheckReport(file=str(path), diagnostics=e.diagnostics)
    return check_source(source, str(path))


def resolved_definitions(source: SourceFile) -> Dict[str, Node]:
    """Definition bodies with references to earlier definitions replaced by those bodies"""
    resolved: Dict[str, Node] = {}
    for item in source.items:
        if isinstance(item, Definition):
            mapping = {(Sort.PROOF, name): proof for name, proof in resolved.items()}
            resolved[item.name] = substitute(item.proof, mapping)
    return resolved


def closures(source: SourceFile) -> List[Closure]:
    """The run items of a file, with definitions substituted and sugar expanded"""
    mapping = {(Sort.PROOF, name): proof for name, proof in resolved_definitions(source).items()}
    return [expand(substitute(item.closure, mapping)) for item in source.items if isinstance(item, RunItem)]


def corpus_closures(directory: Optional[str] = None) -> List[Tuple[str, Closure]]:
    entries = []
    for path in corpus_files(directory):
        for index, cl in enumerate(closures(load(path))):
            entries.append((f"{path.name}#{index}", cl))
    return entries


def diagnostics_text(diagnostics: List[Diagnostic], file: str) -> str:
    return "\n".join(d.render(file) for d in diagnostics)
