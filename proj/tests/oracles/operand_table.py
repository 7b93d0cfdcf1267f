"""Operand-table oracle: evaluates every builtin operator pair with real
Python values and records the result type, or "error" on TypeError.

Output is a C++ initializer list consumed by tests/unit/test_typecheck.cpp.
"""
import itertools
import sys

SAMPLES = {
    "bool": True,
    "int": 3,
    "float": 2.5,
    "str": "%s",
    "bytes": b"%r",
    "None": None,
    "tuple": (1,),
    "list": [1],
    "dict": {1: 2},
    "set": {1},
}
BINARY = ["+", "-", "*", "/", "//", "%", "**", "&", "|", "^", "<<", ">>", "@"]
COMPARE = ["==", "!=", "<", "<=", ">", ">=", "in", "not in", "is", "is not"]
UNARY = ["-", "+", "~", "not"]


def kind(value):
    name = type(value).__name__
    return "None" if name == "NoneType" else name


def outcome(expr, env):
    try:
        return kind(eval(expr, {}, env))
    except TypeError:
        return "error"


def main():
    rows = []
    for op in BINARY + COMPARE:
        for (ln, lv), (rn, rv) in itertools.product(SAMPLES.items(), SAMPLES.items()):
            rows.append((op, ln, rn, outcome(f"a {op} b", {"a": lv, "b": rv})))
    for op in UNARY:
        for n, v in SAMPLES.items():
            sep = " " if op == "not" else ""
            rows.append((op, n, "", outcome(f"{op}{sep}a", {"a": v})))
    out = sys.stdout
    out.write("// Generated by tests/oracles/operand_table.py; do not edit.\n")
    for op, l, r, res in rows:
        out.write(f'{{"{op}", "{l}", "{r}", "{res}"}},\n')


if __name__ == "__main__":
    main()
