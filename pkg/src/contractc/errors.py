"""Exception hierarchy. Every class carries a stable machine-readable ``code``."""

from __future__ import annotations


class ContractError(Exception):
    code = "contract-error"

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self)}


class ParseError(ContractError):
    code = "parse-error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col

    def to_json(self) -> dict:
        return {**super().to_json(), "line": self.line, "col": self.col}


class TypeCheckError(ContractError):
    code = "type-error"

    def __init__(self, message: str, path: tuple = ()):
        where = "/".join(str(p) for p in path)
        super().__init__(f"{message}" + (f" (at {where})" if where else ""))
        self.path = path


class EvalError(ContractError):
    code = "eval-error"


class MissingObservable(EvalError):
    code = "missing-observable"


class UnboundVariable(EvalError):
    code = "unbound-variable"


class UnboundTemplateVar(EvalError):
    code = "unbound-template-variable"


class SortMismatch(EvalError):
    code = "sort-mismatch"


class DivisionByZero(EvalError):
    code = "division-by-zero"


class ReductionStuck(ContractError):
    code = "reduction-stuck"


class CompileError(ContractError):
    """Raised for constructs outside the compilable subset."""

    code = "compile-error"
    UNSUPPORTED_ACC = "unsupported-acc"
    UNSUPPORTED_LET = "unsupported-let"
    UNSUPPORTED_VAR = "unsupported-var"
    UNKNOWN_OP = "unknown-op"

    def __init__(self, kind: str, path: tuple = ()):
        where = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"{kind} at {where}")
        self.kind = kind
        self.path = path

    def to_json(self) -> dict:
        return {**super().to_json(), "kind": self.kind, "path": list(self.path)}


class EnvFormatError(ContractError):
    code = "env-format"


class CodegenError(ContractError):
    code = "codegen-error"
