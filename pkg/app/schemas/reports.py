from pydantic import BaseModel, Field, model_validator
from typing import Dict, List, Optional


class SourceSpan(BaseModel):
    """Location of a construct in source text"""
    begin: int = Field(..., ge=0)
    end: int = Field(..., ge=0)
    line: int = Field(1, ge=1)
    column: int = Field(1, ge=1)

    @model_validator(mode="after")
    def check_order(self):
        if self.begin > self.end:
            raise ValueError("span begin must not exceed end")
        return self


class Diagnostic(BaseModel):
    """Parser or checker message"""
    severity: str = "error"  # error, warning
    message: str = Field(..., min_length=1)
    span: Optional[SourceSpan] = None
    expected: List[str] = []

    def render(self, filename: str = "<input>") -> str:
        where = f"{filename}:{self.span.line}:{self.span.column}" if self.span else filename
        text = f"{where}: {self.severity}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(sorted(self.expected))})"
        return text


class DefinitionReport(BaseModel):
    """Checking result for one definition or check obligation"""
    name: str
    status: str  # ok, error
    inferred_type: Optional[str] = None
    declared_type: Optional[str] = None
    error: Optional[str] = None
    rule: Optional[str] = None


class CheckReport(BaseModel):
    """Checking result for a whole file"""
    file: str
    definitions: List[DefinitionReport] = []
    diagnostics: List[Diagnostic] = []

    @property
    def ok(self) -> bool:
        return not self.diagnostics and all(d.status == "ok" for d in self.definitions)


class TraceRecord(BaseModel):
    """One line of a JSON-lines machine trace"""
    step: int
    rule: str
    focus: Optional[str] = None
    command: str
    store: List[Dict[str, str]] = []


class RunReport(BaseModel):
    """Outcome of running one command"""
    machine: str
    outcome: str  # normal, stuck, fuel_exhausted
    reason: Optional[str] = None
    steps: int
    command: str
    store: List[Dict[str, str]] = []
    answer: Optional[str] = None


class AgreementReport(BaseModel):
    """Big-step versus small-step comparison"""
    big: RunReport
    small: RunReport
    agree: bool
    detail: Optional[str] = None


class ChoiceReport(BaseModel):
    """Witness extraction from a choice proof"""
    program: str  # acn, dc
    machine: str
    n: int
    x0: Optional[int] = None
    value: Optional[int] = None
    term: str
    unfoldings: int
    steps: int
    requery_unfoldings: Optional[int] = None  # unfoldings when indices 0..n are queried again


class SuiteReport(BaseModel):
    """Aggregated result of the property suite"""
    checks: Dict[str, int] = {}
    failures: List[str] = []

    @property
    def ok(self) -> bool:
        return not self.failures
