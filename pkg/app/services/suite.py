"""
Property suite

Executable checks of the metatheory on the corpus and on generated closures: subject
reduction on both machines, big/small agreement, the store algebra, conversion
regressions and the admissibility of the natural-deduction macros.
"""
import logging
import random
from typing import Callable, List, Optional, Tuple

from config import settings
from app.core.exceptions import DlpawError, StoreError, TypeCheckError
from app.core.names import substitute
from app.core.parser import CheckItem, Definition, parse
from app.core.pretty import pretty
from app.models.formulas import And, Eq, Exists, Forall, Or
from app.models.syntax import (
    Binding, CaseC, Closure, CoVar, Cut, DPair, DestC, Inj, LamT, Mu, MuT, Nat, Node, PVar,
    Pair, Refl, Sort, SplitC, TStack, TVar, numeral,
)
from app.schemas.reports import SuiteReport
from app.services.conversion import conv
from app.services.corpus import corpus_closures, corpus_files, load, resolved_definitions
from app.services.machine import BigStepMachine, Outcome
from app.services.macros import admissibility_suite, expand
from app.services.smallstep import SmallStepMachine, agree
from app.services.store import append, compatible, domain, extends, independent, union
from app.services.typecheck import TypeChecker, TypingContext, check_definition

logger = logging.getLogger(__name__)

ANSWER = "alpha"

# (left, right, convertible)
CONVERSIONS = [
    ("(lam x. S(x)) 2 = 3", "3 = 3", True),
    ("(lam f. f 0) (lam y. S(y)) = 1", "1 = 1", True),
    ("rec(2; 0; (m, r). S(S(r))) = 4", "4 = 4", True),
    ("rec(0; 5; (m, r). r) = 5", "0 = 0", True),
    ("exists x : nat. rec(1; x; (m, r). S(r)) = S(x)", "exists y : nat. S(y) = S(y)", True),
    ("wit [3, refl] = 3", "3 = 3", True),
    ("wit shift(<[4, refl] | tp>) = 4", "4 = 4", True),
    ("wit shift(<[2, refl] | mu~ a. <a | tp>>) = 2", "2 = 2", True),
    ("wit shift(<(refl, [3, refl]) | split~ (a1, a2) -> <a2 | tp>>) = 3", "0 = 0", True),
    ("wit fix(2; [0, refl]; (c, x). [S(x), refl]) = 2", "2 = 2", True),
    ("Pi (a : 0 = 0). wit [1, a] = 1", "0 = 0 -> 1 = 1", True),
    ("S(1) = S(2)", "bot", True),
    ("0 = S(x)", "bot", True),
    ("S(x) = S(y)", "x = y", True),
    ("(lam x. x) 0 = 0 /\\ 1 = 1", "0 = 0 /\\ 1 = 1", True),
    ("0 = 0 \\/ bot", "S(0) = S(0) \\/ 0 = 1", True),
    ("forall x : nat. (lam y. y) x = x", "forall z : nat. z = z", True),
    ("forall x : nat. x = x", "forall y : nat. y = y", True),
    ("top", "top", True),
    ("nu [0] (x, f). x = x /\\ f S(x) = 0", "0 = 0 /\\ nu [1] (x, f). x = x /\\ f S(x) = 0", True),
    ("nu [1] (x, f). x = x /\\ f S(x) = 0", "1 = 1 /\\ nu [2] (x, f). x = x /\\ f S(x) = 0", True),
    ("nu [0] (x, f). x = x /\\ f S(x) = 0", "0 = 0 /\\ (1 = 1 /\\ nu [2] (x, f). x = x /\\ f S(x) = 0)", True),
    ("x = 1", "1 = x", False),
    ("x = y", "y = x", False),
    ("0 = 0", "bot", False),
    ("top", "bot", False),
    ("0 = 0 /\\ 1 = 1", "0 = 0 \\/ 1 = 1", False),
    ("exists x : nat. x = 0", "forall x : nat. x = 0", False),
    ("exists x : nat. x = 0", "exists x : nat. x = 1", False),
    ("forall x : nat. x = x", "forall x : nat -> nat. x = x", False),
    ("Pi (a : 0 = 0). 1 = 1", "Pi (a : 1 = 0). 1 = 1", False),
    ("rec(x; 0; (m, r). S(r)) = x", "x = x", False),
    ("wit e = 0", "0 = 0", False),
    ("nu [0] (x, f). x = x /\\ f S(x) = 0", "nu [1] (x, f). x = x /\\ f S(x) = 0", False),
]


class ClosureGenerator:
    """Random well-typed closures ⟨p‖e⟩ with the answer co-variable as only free name"""

    def __init__(self, seed: int = 0, depth: int = 3):
        self.rng = random.Random(seed)
        self.depth = depth

    def proof(self, depth: int) -> Tuple[Node, Node]:
        """A closed proof with its formula"""
        k = numeral(self.rng.randint(0, 3))
        choice = self.rng.randrange(6 if depth > 0 else 3)
        if choice == 0:
            return Refl(), Eq(k, k)
        if choice == 1:
            return DPair(k, Refl()), Exists("x", Nat(), Eq(TVar("x"), k))
        if choice == 2:
            return LamT("x", Refl()), Forall("x", Nat(), Eq(TVar("x"), TVar("x")))
        left, a = self.proof(depth - 1)
        if choice == 3:
            right, b = self.proof(depth - 1)
            return Pair(left, right), And(a, b)
        if choice == 4:
            other = Eq(numeral(0), numeral(1))
            index = self.rng.choice((1, 2))
            return Inj(index, left), Or(a, other) if index == 1 else Or(other, a)
        return Mu("k", Cut(left, MuT("a", Cut(PVar("a"), CoVar("k"))))), a

    def consumer(self, formula: Node) -> Tuple[Node, Node]:
        """A context consuming the formula, with the formula of the answer it passes on"""
        answer = CoVar(ANSWER)
        if isinstance(formula, And) and self.rng.random() < 0.7:
            return SplitC("a1", "a2", Cut(PVar("a2"), answer)), formula.right
        if isinstance(formula, Or) and self.rng.random() < 0.7:
            return CaseC("a1", Cut(Inj(1, PVar("a1")), answer), "a2", Cut(Inj(2, PVar("a2")), answer)), formula
        if isinstance(formula, Exists) and self.rng.random() < 0.7:
            return DestC("y", "b", Cut(DPair(TVar("y"), PVar("b")), answer)), formula
        if isinstance(formula, Forall) and self.rng.random() < 0.7:
            j = numeral(self.rng.randint(0, 3))
            return TStack(j, answer), substitute(formula.body, {(Sort.TERM, formula.var): j})
        if self.rng.random() < 0.5:
            return MuT("a", Cut(PVar("a"), answer)), formula
        return answer, formula

    def closure(self) -> Tuple[Closure, TypingContext]:
        proof, formula = self.proof(self.depth)
        ctx, answer = self.consumer(formula)
        return Closure(Cut(proof, ctx), ()), TypingContext().extend(Sort.COVAR, ANSWER, answer)


class PropertySuite:
    """
    Runs every property and collects violations

    Args:
        directory: Corpus directory
        fuzz: Number of generated closures for subject reduction and agreement
        fuel: Step budget per run
        seed: Generator seed
    """

    def __init__(self, directory: Optional[str] = None, fuzz: int = 0, fuel: Optional[int] = None, seed: int = 0):
        self.directory = directory or settings.CORPUS_DIR
        self.fuzz = fuzz
        self.fuel = settings.FUEL if fuel is None else fuel
        self.seed = seed
        self.report = SuiteReport()

    def _count(self, name: str) -> None:
        self.report.checks[name] = self.report.checks.get(name, 0) + 1

    def _fail(self, name: str, detail: str) -> None:
        logger.warning(f"Property {name} violated: {detail}")
        self.report.failures.append(f"{name}: {detail}")

    def run(self) -> SuiteReport:
        for prop in (self.admissibility, self.conversions, self.store_algebra, self.agreement, self.subject_reduction):
            try:
                prop()
            except DlpawError as e:
                self._fail(prop.__name__, str(e))
        logger.info(f"Suite finished: {sum(self.report.checks.values())} checks, {len(self.report.failures)} failures")
        return self.report

    # Properties

    def admissibility(self) -> None:
        for case in admissibility_suite():
            ctx = TypingContext()
            for hyp in case.hyps:
                ctx = ctx.extend(hyp.sort, hyp.name, hyp.formula)
            self._count("admissibility")
            result = check_definition(case.rule, case.proof, case.formula, ctx)
            if result.status != "ok":
                self._fail("admissibility", f"{case.rule}: {result.error}")

    def conversions(self) -> None:
        for left, right, expected in CONVERSIONS:
            self._count("conversion")
            if conv(parse(left, "formula"), parse(right, "formula")) != expected:
                self._fail("conversion", f"{left} ≡ {right} should be {expected}")

    def store_algebra(self) -> None:
        rng = random.Random(self.seed)
        values = [Refl(), DPair(numeral(0), Refl()), LamT("x", Refl()), PVar("z")]
        names = ["a", "b", "c", "d"]

        def store() -> Tuple[Binding, ...]:
            chosen = rng.sample(names, rng.randint(0, len(names)))
            return tuple(Binding(n, Sort.PROOF, rng.choice(values)) for n in chosen)

        for _ in range(50 + self.fuzz):
            left, right = store(), store()
            self._count("store")
            if independent(left, right) and union(left, right) != left + right:
                self._fail("store", f"independent union is not concatenation: {left} {right}")
            if not compatible(left, right):
                continue
            try:
                merged = union(left, right)
            except StoreError:
                continue
            if not (extends(left, merged) and extends(right, merged)):
                self._fail("store", f"union does not extend its arguments: {left} {right}")
            joined, _ = append(left, right, Cut(PVar("a"), CoVar(ANSWER)))
            if len(domain(joined)) != len(joined):
                self._fail("store", "append produced duplicate names")

    def agreement(self) -> None:
        for name, cl in self._closures():
            self._count("agreement")
            result = agree(cl, self.fuel)
            if not result.agree:
                self._fail("agreement", f"{name}: {result.detail}")
            elif result.big.outcome != Outcome.NORMAL.value:
                self._fail("normalization", f"{name}: {result.big.outcome} {result.big.reason or ''}".strip())

    def subject_reduction(self) -> None:
        for name, cl, ctx in self._typed_closures():
            self._count("subject-reduction")
            self._preserved(name, cl, ctx)

    # Inputs

    def _closures(self) -> List[Tuple[str, Closure]]:
        entries = corpus_closures(self.directory)
        generator = ClosureGenerator(self.seed)
        for i in range(self.fuzz):
            cl, _ = generator.closure()
            entries.append((f"generated#{i}", cl))
        return entries

    def _typed_closures(self) -> List[Tuple[str, Closure, TypingContext]]:
        """⟨p‖α⟩ with α : A for every definition and check item, plus generated closures"""
        entries = []
        for path in corpus_files(self.directory):
            source = load(path)
            mapping = {(Sort.PROOF, n): p for n, p in resolved_definitions(source).items()}
            for index, item in enumerate(source.items):
                if not isinstance(item, (Definition, CheckItem)):
                    continue
                proof = expand(substitute(item.proof, mapping))
                formula = substitute(item.formula, mapping)
                ctx = TypingContext().extend(Sort.COVAR, ANSWER, formula)
                entries.append((f"{path.name}#{index}", Closure(Cut(proof, CoVar(ANSWER)), ()), ctx))
        generator = ClosureGenerator(self.seed)
        for i in range(self.fuzz):
            cl, ctx = generator.closure()
            entries.append((f"generated#{i}", cl, ctx))
        return entries

    def _preserved(self, name: str, cl: Closure, ctx: TypingContext) -> None:
        if not self._typed(ctx, cl):
            return
        failures: List[str] = []

        def check(machine: str) -> Callable:
            def hook(index: int, rule: str, *state) -> None:
                current = state[0] if len(state) == 1 else Closure(state[0].cmd, state[1])
                if not failures and not self._typed(ctx, current):
                    failures.append(f"{name}: {machine} step {index} ({rule}) gives an ill-typed {pretty(current.cmd)}")
            return hook

        BigStepMachine(self.fuel, trace=check("big")).run(cl)
        SmallStepMachine(self.fuel, trace=check("small")).run(cl)
        for failure in failures:
            self._fail("subject-reduction", failure)

    @staticmethod
    def _typed(ctx: TypingContext, cl: Closure) -> bool:
        try:
            TypeChecker().check_closure(ctx, cl)
        except TypeCheckError:
            return False
        return True


def run_suite(directory: Optional[str] = None, fuzz: int = 0, fuel: Optional[int] = None, seed: int = 0) -> SuiteReport:
    return PropertySuite(directory, fuzz, fuel, seed).run()
