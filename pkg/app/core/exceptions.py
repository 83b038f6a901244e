"""Exception hierarchy of the interpreter and checker"""
from typing import List, Optional, Sequence

from app.schemas.reports import Diagnostic, SourceSpan


class DlpawError(Exception):
    """Base class for all interpreter errors"""


class ParseError(DlpawError):
    """Lexical or syntactic failure; carries diagnostics with spans"""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics) or "parse error")


class TypeCheckError(DlpawError):
    """A failed typing premise"""

    def __init__(
        self,
        rule: str,
        message: str,
        expected: Optional[str] = None,
        found: Optional[str] = None,
        deps: Optional[List[str]] = None,
        span: Optional[SourceSpan] = None,
    ):
        self.rule = rule
        self.message = message
        self.expected = expected
        self.found = found
        self.deps = deps or []
        self.span = span
        super().__init__(self.render())

    def render(self) -> str:
        text = f"[{self.rule}] {self.message}"
        if self.expected is not None:
            text += f"\n  expected: {self.expected}"
        if self.found is not None:
            text += f"\n  found:    {self.found}"
        if self.deps:
            text += f"\n  deps:     {' '.join(self.deps)}"
        return text


class MachineError(DlpawError):
    """Failure of a sub-evaluation (run_nef, reduce_term)"""


class StoreError(DlpawError):
    """Incompatible stores"""

    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(message)


class MacroError(DlpawError):
    """Sugar that cannot be expanded"""
