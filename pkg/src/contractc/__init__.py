"""Compiler and pricing toolkit for a small financial contract language."""

from contractc.codegen import Backend, emit, simplify_loopif0
from contractc.compiler import aggregate_price, compile_contract, compile_exp
from contractc.errors import ContractError
from contractc.parser import parse_contract, parse_exp, parse_program, print_contract
from contractc.payoff import cut_payoff, il_sem, parse_il, print_il
from contractc.reduction import reduce
from contractc.semantics import ExtEnv, Trace, Trans, csem, horizon, instantiate
from contractc.typecheck import type_check_contract

__version__ = "0.1.0"
