"""
Concrete syntax

Text is parsed by a lark Earley parser into a sort-agnostic tree; a scoped resolver then
assigns every identifier its sort (term variable, proof variable, co-variable) from the
binders in scope and from the position it occurs in.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from lark import Lark, Token
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from app.core.exceptions import ParseError
from app.models.formulas import And, Bot, Eq, Exists, Forall, Nu, Or, Pi, Top
from app.models.syntax import (
    CTP,
    Abort, AppP, AppT, Arrow, Binding, CaseC, CaseS, Catch, Closure, Cofix, CoShift, CoVar,
    Cut, DPair, DestC, DestS, EqC, Exfalso, Ind, Inj, LamP, LamT, Let, Mu, MuT, MuTx, Nat,
    Node, PStack, PVar, Pair, Prf, Proj, Rec, Refl, Shift, Sort, SplitC, SplitS, SubstS,
    Succ, TApp, TCut, TLam, TStack, TVar, Throw, Wit, TERM_CLASSES, numeral,
)
from app.schemas.reports import Diagnostic, SourceSpan

logger = logging.getLogger(__name__)

GRAMMAR = r"""
file: item*
?item: "def" NAME ":" formula ":=" expr      -> def_item
     | "run" closure                         -> run_item
     | "check" expr ":" formula              -> check_item

closure: command binding*
binding: "[" NAME ":=" expr "]"              -> proof_binding
       | "[" covar ":=" ctx "]"              -> covar_binding
command: "<" expr "|" ctx ">"
covar: COVAR | BARE_COVAR

?expr: "lam" NAME "." expr                   -> lam
     | "fun" NAME "." expr                   -> fun
     | "mu" covar "." command                -> mu
     | "let" NAME "=" expr "in" expr         -> let
     | "split" expr "as" "(" NAME "," NAME ")" "in" expr    -> split
     | "dest" expr "as" "(" NAME "," NAME ")" "in" expr     -> dest
     | "case" expr "of" "{" "inj1" NAME "->" expr "|" "inj2" NAME "->" expr "}" -> case
     | app

?app: app atom                               -> apply
    | "wit" atom                             -> wit
    | "prf" atom                             -> prf
    | "exfalso" atom                         -> exfalso
    | "subst" atom atom                      -> subst
    | "catch" covar atom                     -> catch
    | "throw" covar atom                     -> throw
    | "inj1" atom                            -> inj1
    | "inj2" atom                            -> inj2
    | atom

?atom: NAME                                  -> var
     | NUMBER                                -> numeral
     | "refl"                                -> refl
     | "ctp"                                 -> ctp
     | "(" expr ")"
     | "(" expr "," expr ")"                 -> pair
     | "[" expr "," expr "]"                 -> dpair
     | "S" "(" expr ")"                      -> succ
     | "rec" "(" expr ";" expr ";" "(" NAME "," NAME ")" "." expr ")"  -> rec
     | "fix" "(" expr ";" expr ";" "(" NAME "," NAME ")" "." expr ")"  -> fix
     | "cofix" "(" expr ";" "(" NAME "," NAME ")" "." expr ")"         -> cofix
     | "shift" "(" closure ")"               -> shift
     | "pi1" "(" expr ")"                    -> pi1
     | "pi2" "(" expr ")"                    -> pi2

?ctx: covar                                  -> covar_ctx
    | "abort"                                -> abort
    | _MU_TILDE NAME "." closure             -> mut
    | _CASE_TILDE "{" "inj1" NAME "->" command "|" "inj2" NAME "->" command "}" -> casec
    | _SPLIT_TILDE "(" NAME "," NAME ")" "->" command    -> splitc
    | _DEST_TILDE "(" NAME "," NAME ")" "->" command     -> destc
    | _EQ_TILDE "->" command                 -> eqc
    | "coshift" "(" command ")"              -> coshift
    | app "." ctx                            -> stack
    | "(" ctx ")"

?formula: binder
        | disj "->" formula                                -> implies
        | disj
        | disj_open
?binder: "Pi" "(" NAME ":" formula ")" "." formula         -> pi
       | "forall" NAME ":" type "." formula                -> forall
       | "exists" NAME ":" type "." formula                -> exists
       | "nu" "[" expr "]" "(" NAME "," NAME ")" "." formula  -> nu
?disj: disj "\\/" conj                       -> or_
     | conj
?conj: conj "/\\" fatom                      -> and_
     | fatom
// a binder closing a conjunction or disjunction extends to the end
?disj_open: disj "\\/" binder                -> or_
          | disj "\\/" conj_open             -> or_
          | conj_open
?conj_open: conj "/\\" binder                -> and_
?fatom: "top"                                -> top
      | "bot"                                -> bot
      | app "=" app                          -> eq
      | "(" formula ")"

?type: tatom "->" type                       -> arrow
     | tatom
?tatom: "nat"                                -> nat
      | "(" type ")"

_MU_TILDE.2: "mu~"
_CASE_TILDE.2: "case~"
_SPLIT_TILDE.2: "split~"
_DEST_TILDE.2: "dest~"
_EQ_TILDE.2: "eq~"
BARE_COVAR.2: /(alpha|beta|tp|star)\b/
COVAR: /'[A-Za-z_][A-Za-z0-9_']*/
NAME: /[A-Za-z_][A-Za-z0-9_']*/
NUMBER: /[0-9]+/
COMMENT: /--[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

START_RULES = {
    "term": "expr",
    "proof": "expr",
    "context": "ctx",
    "command": "command",
    "closure": "closure",
    "formula": "formula",
    "type": "type",
}

PROJECTION_ALIASES = {"fst": "pi1", "snd": "pi2", "pi_1": "pi1", "pi_2": "pi2"}


@dataclass
class Definition:
    name: str
    formula: Node
    proof: Node
    span: Optional[SourceSpan] = None


@dataclass
class RunItem:
    closure: Closure
    span: Optional[SourceSpan] = None


@dataclass
class CheckItem:
    proof: Node
    formula: Node
    span: Optional[SourceSpan] = None


Item = Union[Definition, RunItem, CheckItem]


@dataclass
class SourceFile:
    """A parsed .dlpaw file"""
    items: List[Item] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def definitions(self) -> Dict[str, Definition]:
        return {item.name: item for item in self.items if isinstance(item, Definition)}

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


class _SortError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _sort_of(node: Node) -> Sort:
    return Sort.TERM if isinstance(node, TERM_CLASSES) else Sort.PROOF


class _Resolver:
    """Turns lark trees into syntax nodes, resolving identifier sorts by scope"""

    def __init__(self, text: str, defs: Optional[Dict[str, Node]] = None):
        self.text = text
        self.defs = defs or {}
        self.warnings: List[Diagnostic] = []

    # Diagnostics

    def span(self, tree) -> Optional[SourceSpan]:
        meta = getattr(tree, "meta", None)
        if isinstance(tree, Token):
            return SourceSpan(begin=tree.start_pos, end=tree.end_pos, line=tree.line, column=tree.column)
        if meta is None or getattr(meta, "empty", True):
            return None
        return SourceSpan(begin=meta.start_pos, end=meta.end_pos, line=meta.line, column=meta.column)

    def fail(self, tree, message: str):
        raise _SortError(Diagnostic(severity="error", message=message, span=self.span(tree)))

    def warn(self, tree, message: str):
        logger.warning(message)
        self.warnings.append(Diagnostic(severity="warning", message=message, span=self.span(tree)))

    # Expressions

    def expr(self, tree, env: Dict[str, Sort], want: Optional[Sort]) -> Node:
        node = getattr(self, f"e_{tree.data}")(tree, env, want)
        if want is not None and _sort_of(node) is not want:
            expected = "a term" if want is Sort.TERM else "a proof"
            self.fail(tree, f"expected {expected}, found {'a term' if want is Sort.PROOF else 'a proof'}")
        return node

    def e_var(self, tree, env, want):
        name = str(tree.children[0])
        sort = env.get(name)
        if sort is Sort.TERM:
            return TVar(name)
        if sort is Sort.PROOF:
            return PVar(name)
        if name in PROJECTION_ALIASES:
            self.fail(tree, f"'{name}' is not part of the core syntax; write {PROJECTION_ALIASES[name]}(p), which the macro layer expands")
        if name in self.defs:
            return self.defs[name]
        if want is Sort.TERM:
            return TVar(name)
        self.warn(tree, f"unbound identifier '{name}' read as a proof variable")
        return PVar(name)

    def e_numeral(self, tree, env, want):
        return numeral(int(tree.children[0]))

    def e_refl(self, tree, env, want):
        return Refl()

    def e_ctp(self, tree, env, want):
        return PVar(CTP)

    def e_pair(self, tree, env, want):
        left, right = tree.children
        return Pair(self.expr(left, env, Sort.PROOF), self.expr(right, env, Sort.PROOF))

    def e_dpair(self, tree, env, want):
        witness, body = tree.children
        return DPair(self.expr(witness, env, Sort.TERM), self.expr(body, env, Sort.PROOF))

    def e_succ(self, tree, env, want):
        return Succ(self.expr(tree.children[0], env, Sort.TERM))

    def e_rec(self, tree, env, want):
        index, base, x, y, step = tree.children
        inner = {**env, str(x): Sort.TERM, str(y): Sort.TERM}
        return Rec(
            self.expr(index, env, Sort.TERM), self.expr(base, env, Sort.TERM),
            str(x), str(y), self.expr(step, inner, Sort.TERM),
        )

    def e_fix(self, tree, env, want):
        index, base, a, x, step = tree.children
        inner = {**env, str(a): Sort.PROOF, str(x): Sort.TERM}
        return Ind(
            self.expr(index, env, Sort.TERM), self.expr(base, env, Sort.PROOF),
            str(a), str(x), self.expr(step, inner, Sort.PROOF),
        )

    def e_cofix(self, tree, env, want):
        index, b, x, body = tree.children
        inner = {**env, str(b): Sort.PROOF, str(x): Sort.TERM}
        return Cofix(self.expr(index, env, Sort.TERM), str(b), str(x), self.expr(body, inner, Sort.PROOF))

    def e_shift(self, tree, env, want):
        cmd, store = self.closure(tree.children[0], env)
        return Shift(cmd, store)

    def e_pi1(self, tree, env, want):
        return Proj(1, self.expr(tree.children[0], env, Sort.PROOF))

    def e_pi2(self, tree, env, want):
        return Proj(2, self.expr(tree.children[0], env, Sort.PROOF))

    def e_lam(self, tree, env, want):
        var, body = tree.children
        inner = {**env, str(var): Sort.TERM}
        resolved = self.expr(body, inner, want)
        if _sort_of(resolved) is Sort.TERM:
            return TLam(str(var), resolved)
        return LamT(str(var), resolved)

    def e_fun(self, tree, env, want):
        var, body = tree.children
        return LamP(str(var), self.expr(body, {**env, str(var): Sort.PROOF}, Sort.PROOF))

    def e_mu(self, tree, env, want):
        covar, cmd = tree.children
        name = self.covar(covar)
        return Mu(name, self.command(cmd, {**env, name: Sort.COVAR}))

    def e_let(self, tree, env, want):
        var, bound, body = tree.children
        return Let(
            str(var), self.expr(bound, env, Sort.PROOF),
            self.expr(body, {**env, str(var): Sort.PROOF}, Sort.PROOF),
        )

    def e_split(self, tree, env, want):
        bound, a1, a2, body = tree.children
        inner = {**env, str(a1): Sort.PROOF, str(a2): Sort.PROOF}
        return SplitS(self.expr(bound, env, Sort.PROOF), str(a1), str(a2), self.expr(body, inner, Sort.PROOF))

    def e_dest(self, tree, env, want):
        bound, x, a, body = tree.children
        inner = {**env, str(x): Sort.TERM, str(a): Sort.PROOF}
        return DestS(self.expr(bound, env, Sort.PROOF), str(x), str(a), self.expr(body, inner, Sort.PROOF))

    def e_case(self, tree, env, want):
        bound, a1, body1, a2, body2 = tree.children
        return CaseS(
            self.expr(bound, env, Sort.PROOF),
            str(a1), self.expr(body1, {**env, str(a1): Sort.PROOF}, Sort.PROOF),
            str(a2), self.expr(body2, {**env, str(a2): Sort.PROOF}, Sort.PROOF),
        )

    def e_apply(self, tree, env, want):
        fun, arg = tree.children
        head = self.expr(fun, env, Sort.TERM if want is Sort.TERM else None)
        if _sort_of(head) is Sort.TERM:
            return TApp(head, self.expr(arg, env, Sort.TERM))
        resolved = self.expr(arg, env, None)
        if _sort_of(resolved) is Sort.TERM:
            return AppT(head, resolved)
        return AppP(head, resolved)

    def e_wit(self, tree, env, want):
        return Wit(self.expr(tree.children[0], env, Sort.PROOF))

    def e_prf(self, tree, env, want):
        return Prf(self.expr(tree.children[0], env, Sort.PROOF))

    def e_exfalso(self, tree, env, want):
        return Exfalso(self.expr(tree.children[0], env, Sort.PROOF))

    def e_subst(self, tree, env, want):
        eq, body = tree.children
        return SubstS(self.expr(eq, env, Sort.PROOF), self.expr(body, env, Sort.PROOF))

    def e_catch(self, tree, env, want):
        covar, body = tree.children
        name = self.covar(covar)
        return Catch(name, self.expr(body, {**env, name: Sort.COVAR}, Sort.PROOF))

    def e_throw(self, tree, env, want):
        covar, body = tree.children
        return Throw(self.covar(covar), self.expr(body, env, Sort.PROOF))

    def e_inj1(self, tree, env, want):
        return Inj(1, self.expr(tree.children[0], env, Sort.PROOF))

    def e_inj2(self, tree, env, want):
        return Inj(2, self.expr(tree.children[0], env, Sort.PROOF))

    # Co-variables, contexts, commands, stores

    def covar(self, tree) -> str:
        token = str(tree.children[0])
        return token[1:] if token.startswith("'") else token

    def ctx(self, tree, env, term_mode: bool = False) -> Node:
        data = tree.data
        if data == "covar_ctx":
            if term_mode:
                self.fail(tree, "a co-variable cannot consume a term")
            return CoVar(self.covar(tree.children[0]))
        if data == "abort":
            return Abort()
        if data == "mut":
            var, closure = tree.children
            name = str(var)
            if term_mode:
                cmd, store = self.closure(closure, {**env, name: Sort.TERM})
                return MuTx(name, cmd, store)
            cmd, store = self.closure(closure, {**env, name: Sort.PROOF})
            return MuT(name, cmd, store)
        if term_mode and data != "stack":
            self.fail(tree, "only stacks and mu~ binders can consume a term")
        if data == "casec":
            a1, c1, a2, c2 = tree.children
            return CaseC(
                str(a1), self.command(c1, {**env, str(a1): Sort.PROOF}),
                str(a2), self.command(c2, {**env, str(a2): Sort.PROOF}),
            )
        if data == "splitc":
            a1, a2, cmd = tree.children
            return SplitC(str(a1), str(a2), self.command(cmd, {**env, str(a1): Sort.PROOF, str(a2): Sort.PROOF}))
        if data == "destc":
            x, a, cmd = tree.children
            return DestC(str(x), str(a), self.command(cmd, {**env, str(x): Sort.TERM, str(a): Sort.PROOF}))
        if data == "eqc":
            return EqC(self.command(tree.children[0], env))
        if data == "coshift":
            return CoShift(self.command(tree.children[0], {**env, CTP: Sort.PROOF}))
        if data == "stack":
            head, tail = tree.children
            if term_mode:
                return TStack(self.expr(head, env, Sort.TERM), self.ctx(tail, env, True))
            resolved = self.expr(head, env, None)
            if _sort_of(resolved) is Sort.TERM:
                return TStack(resolved, self.ctx(tail, env))
            return PStack(resolved, self.ctx(tail, env))
        self.fail(tree, f"unexpected context form {data}")

    def command(self, tree, env) -> Node:
        left, right = tree.children
        proof = self.expr(left, env, None)
        if _sort_of(proof) is Sort.TERM:
            return TCut(proof, self.ctx(right, env, True))
        return Cut(proof, self.ctx(right, env))

    def closure(self, tree, env) -> Tuple[Node, Tuple[Binding, ...]]:
        cmd_tree, *binding_trees = tree.children
        scope = dict(env)
        store = []
        for b in binding_trees:
            if b.data == "proof_binding":
                name, value = b.children
                store.append(Binding(str(name), Sort.PROOF, self.expr(value, scope, Sort.PROOF)))
                scope[str(name)] = Sort.PROOF
            else:
                covar, value = b.children
                name = self.covar(covar)
                store.append(Binding(name, Sort.COVAR, self.ctx(value, scope)))
                scope[name] = Sort.COVAR
        return self.command(cmd_tree, scope), tuple(store)

    # Formulas and types

    def formula(self, tree, env) -> Node:
        data = tree.data
        if data == "top":
            return Top()
        if data == "bot":
            return Bot()
        if data == "eq":
            left, right = tree.children
            return Eq(self.expr(left, env, Sort.TERM), self.expr(right, env, Sort.TERM))
        if data == "and_":
            return And(self.formula(tree.children[0], env), self.formula(tree.children[1], env))
        if data == "or_":
            return Or(self.formula(tree.children[0], env), self.formula(tree.children[1], env))
        if data == "implies":
            return Pi("_", self.formula(tree.children[0], env), self.formula(tree.children[1], env))
        if data == "pi":
            var, dom, cod = tree.children
            return Pi(str(var), self.formula(dom, env), self.formula(cod, {**env, str(var): Sort.PROOF}))
        if data in ("forall", "exists"):
            var, typ, body = tree.children
            cls = Forall if data == "forall" else Exists
            return cls(str(var), self.type(typ), self.formula(body, {**env, str(var): Sort.TERM}))
        if data == "nu":
            index, x, f, body = tree.children
            inner = {**env, str(x): Sort.TERM, str(f): Sort.TERM}
            return Nu(self.expr(index, env, Sort.TERM), str(x), str(f), self.formula(body, inner))
        self.fail(tree, f"expected a formula, found {data}")

    def type(self, tree) -> Node:
        if tree.data == "nat":
            return Nat()
        if tree.data == "arrow":
            return Arrow(self.type(tree.children[0]), self.type(tree.children[1]))
        self.fail(tree, f"expected a type, found {tree.data}")


class Parser:
    """Wraps the lark parser and the sort resolver"""

    def __init__(self):
        self._lark = Lark(
            GRAMMAR,
            start=["file"] + sorted(set(START_RULES.values())),
            parser="earley",
            lexer="basic",
            propagate_positions=True,
        )

    def _tree(self, text: str, start: str):
        try:
            return self._lark.parse(text, start=start)
        except UnexpectedInput as e:
            raise ParseError([self._diagnostic(text, e)]) from None

    def _diagnostic(self, text: str, error: UnexpectedInput) -> Diagnostic:
        pos = getattr(error, "pos_in_stream", None)
        if pos is None or pos < 0:
            pos = len(text)
        line = text.count("\n", 0, pos) + 1
        column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        if isinstance(error, UnexpectedCharacters):
            message = f"unexpected character {text[pos:pos + 1]!r}"
            expected = error.allowed or set()
        elif isinstance(error, UnexpectedEOF):
            message = "unexpected end of input"
            expected = error.expected or []
        elif isinstance(error, UnexpectedToken):
            message = f"unexpected token {str(error.token)!r}"
            expected = error.expected or set()
        else:
            message = str(error).splitlines()[0]
            expected = []
        end = min(pos + 1, len(text))
        return Diagnostic(
            severity="error",
            message=message,
            span=SourceSpan(begin=min(pos, end), end=end, line=line, column=column),
            expected=[self._terminal_text(name) for name in expected],
        )

    def _terminal_text(self, name: str) -> str:
        try:
            pattern = self._lark.get_terminal(name).pattern
        except KeyError:
            return name
        return pattern.value if pattern.type == "str" else name

    def parse(
        self,
        text: str,
        sort: str = "proof",
        defs: Optional[Dict[str, Node]] = None,
        scope: Optional[Dict[str, Sort]] = None,
    ) -> Node:
        """
        Parse text as one syntactic sort

        Args:
            text: Source text
            sort: One of term, proof, context, command, closure, formula, type
            defs: Previously defined proofs that bare identifiers may refer to
            scope: Sorts of free names declared by the caller (e.g. hypotheses)

        Returns:
            The syntax node; closures are returned as Closure

        Raises:
            ParseError: On lexical, syntactic or sort errors
        """
        if sort not in START_RULES:
            raise ValueError(f"unknown sort {sort!r}")
        tree = self._tree(text, START_RULES[sort])
        resolver = _Resolver(text, defs)
        env = dict(scope or {})
        try:
            if sort == "term":
                return resolver.expr(tree, env, Sort.TERM)
            if sort == "proof":
                return resolver.expr(tree, env, Sort.PROOF)
            if sort == "context":
                return resolver.ctx(tree, env)
            if sort == "command":
                return resolver.command(tree, env)
            if sort == "closure":
                return Closure(*resolver.closure(tree, env))
            if sort == "formula":
                return resolver.formula(tree, env)
            return resolver.type(tree)
        except _SortError as e:
            raise ParseError([e.diagnostic]) from None

    def parse_file(self, text: str, inline: bool = True) -> SourceFile:
        """
        Parse a .dlpaw file

        Identifiers naming an earlier definition denote its proof, or with inline=False a
        proof variable of that name. Sort errors are reported once per item and the
        remaining items are still read.

        Raises:
            ParseError: When the file is not syntactically well-formed
        """
        tree = self._tree(text, "file")
        source = SourceFile()
        defs: Dict[str, Node] = {}
        for item in tree.children:
            resolver = _Resolver(text, defs)
            span = resolver.span(item)
            try:
                if item.data == "def_item":
                    name, formula, proof = item.children
                    definition = Definition(str(name), resolver.formula(formula, {}), resolver.expr(proof, {}, Sort.PROOF), span)
                    defs[definition.name] = definition.proof if inline else PVar(definition.name)
                    source.items.append(definition)
                elif item.data == "run_item":
                    source.items.append(RunItem(Closure(*resolver.closure(item.children[0], {})), span))
                else:
                    proof, formula = item.children
                    source.items.append(CheckItem(resolver.expr(proof, {}, Sort.PROOF), resolver.formula(formula, {}), span))
            except _SortError as e:
                source.diagnostics.append(e.diagnostic)
            source.diagnostics.extend(resolver.warnings)
        logger.info(f"Parsed {len(source.items)} items with {len(source.errors)} errors")
        return source


# Global instances
parser = Parser()


def parse(
    text: str,
    sort: str = "proof",
    defs: Optional[Dict[str, Node]] = None,
    scope: Optional[Dict[str, Sort]] = None,
) -> Node:
    return parser.parse(text, sort, defs, scope)


def parse_file(text: str, inline: bool = True) -> SourceFile:
    return parser.parse_file(text, inline)
