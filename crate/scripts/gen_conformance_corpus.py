#!/usr/bin/env python3
"""Generate the golden conformance corpus used by the acceptance suite.

Writes crates/cli/tests/data/conformance_schema.json (introspection JSON)
and crates/cli/tests/data/conformance_corpus.json. Each case has a query,
a `data` payload, and either `"valid": true` or the JSON path of the one
leaf that was given a value of the wrong type.

Run from the repository root: python3 scripts/gen_conformance_corpus.py
"""

import json
import random
from pathlib import Path

OUT = Path("crates/cli/tests/data")

# type name -> [(field, type expression)]
OBJECTS = {
    "Query": [("person", "Person"), ("people", "[Person!]"), ("pet", "Pet")],
    "Person": [
        ("id", "ID!"),
        ("name", "String"),
        ("age", "Int"),
        ("height", "Float"),
        ("verified", "Boolean"),
        ("pet", "Pet"),
        ("pets", "[Pet]"),
        ("friends", "[Person!]!"),
    ],
    "Pet": [
        ("id", "ID!"),
        ("name", "String!"),
        ("weight", "Float"),
        ("vaccinated", "Boolean"),
        ("tags", "[String!]"),
        ("owner", "Person"),
    ],
}
SCALARS = ["ID", "String", "Int", "Float", "Boolean"]


def type_ref(expr):
    if expr.endswith("!"):
        return {"kind": "NON_NULL", "name": None, "ofType": type_ref(expr[:-1])}
    if expr.startswith("["):
        return {"kind": "LIST", "name": None, "ofType": type_ref(expr[1:-1])}
    kind = "OBJECT" if expr in OBJECTS else "SCALAR"
    return {"kind": kind, "name": expr, "ofType": None}


def introspection():
    types = []
    for name, fields in OBJECTS.items():
        types.append({
            "kind": "OBJECT",
            "name": name,
            "fields": [{"name": f, "args": [], "type": type_ref(t)} for f, t in fields],
            "interfaces": [],
        })
    for s in SCALARS:
        types.append({"kind": "SCALAR", "name": s})
    return {"__schema": {"queryType": {"name": "Query"}, "mutationType": None, "types": types}}


def strip(expr):
    """(base type, list depth, non-null flags) of a type expression."""
    nonnull = expr.endswith("!")
    inner = expr[:-1] if nonnull else expr
    if inner.startswith("["):
        return ("list", inner[1:-1], nonnull)
    return ("named", inner, nonnull)


def scalar_value(name, rng):
    return {
        "ID": lambda: str(rng.randint(1, 999)),
        "String": lambda: rng.choice(["ann", "rex", "tom", "", "kit"]),
        "Int": lambda: rng.randint(0, 90),
        "Float": lambda: rng.choice([1.5, 20.25, 3.0, 0.5]),
        "Boolean": lambda: rng.choice([True, False]),
    }[name]()


def wrong_value(name):
    # Values rejected under the lenient rules.
    return {
        "ID": True,
        "String": 42,
        "Int": "seven",
        "Float": "heavy",
        "Boolean": "yes",
    }[name]


def selection(type_name, rng, depth):
    """Random non-empty selection: list of (field, expr, sub-selection)."""
    fields = OBJECTS[type_name]
    chosen = rng.sample(fields, rng.randint(1, min(3, len(fields))))
    out = []
    for f, expr in chosen:
        base = expr.strip("[]!")
        if base in OBJECTS:
            if depth >= 3:
                continue
            out.append((f, expr, selection(base, rng, depth + 1)))
        else:
            out.append((f, expr, None))
    if not out:
        f, expr = next((f, e) for f, e in fields if e.strip("[]!") not in OBJECTS)
        out.append((f, expr, None))
    return out


def render(sel):
    parts = []
    for f, _, sub in sel:
        parts.append(f if sub is None else f"{f} {{ {render(sub)} }}")
    return " ".join(parts)


def value_for(expr, sub, rng, path, leaves):
    kind, inner, nonnull = strip(expr)
    if not nonnull and rng.random() < 0.1:
        return None
    if kind == "list":
        items = []
        for i in range(rng.randint(0, 3)):
            items.append(value_for(inner, sub, rng, f"{path}[{i}]", leaves))
        return items
    if sub is not None:
        return payload(sub, rng, path, leaves)
    leaves.append((path, inner))
    return scalar_value(inner, rng)


def payload(sel, rng, path, leaves):
    obj = {}
    for f, expr, sub in sel:
        child = f if not path else f"{path}.{f}"
        obj[f] = value_for(expr, sub, rng, child, leaves)
    return obj


def set_path(data, path, value):
    tokens = []
    for part in path.split("."):
        name, _, rest = part.partition("[")
        tokens.append(name)
        for idx in filter(None, rest.split("[")):
            tokens.append(int(idx.rstrip("]")))
    cur = data
    for t in tokens[:-1]:
        cur = cur[t]
    cur[tokens[-1]] = value


def main():
    rng = random.Random(20240917)
    cases = []
    # Hand-written Person/Pet payload that must conform.
    cases.append({
        "name": "person-with-pet",
        "query": "{ person { name age pet { name } } }",
        "data": {"person": {"name": "Luke", "age": 32, "pet": {"name": "R2"}}},
        "valid": True,
    })
    while len(cases) < 50:
        root_field, root_expr = rng.choice(OBJECTS["Query"])
        sub = selection(root_expr.strip("[]!"), rng, 1)
        leaves = []
        data = {root_field: value_for(root_expr, sub, rng, root_field, leaves)}
        query = f"{{ {root_field} {{ {render(sub)} }} }}"
        n = len(cases)
        if n % 5 == 0:
            cases.append({"name": f"valid-{n}", "query": query, "data": data, "valid": True})
            continue
        if not leaves:
            continue
        path, scalar = rng.choice(leaves)
        set_path(data, path, wrong_value(scalar))
        cases.append({"name": f"mutated-{n}", "query": query, "data": data, "valid": False, "path": path})
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "conformance_schema.json").write_text(json.dumps(introspection(), indent=2) + "\n")
    (OUT / "conformance_corpus.json").write_text(json.dumps(cases, indent=1) + "\n")


if __name__ == "__main__":
    main()
