"""Brute-force reference implementations used to cross-check the engine.

None of these call into the code paths they check: path membership is decided
node by node over a full tree walk, arithmetic is done directly, and context
trees are recomputed as a join closure over the raw rows.
"""

from __future__ import annotations

import random

from srml.errors import NavigationError
from srml.xmltree import Element


def _survives(node: Element, step) -> bool:
    siblings = node.parent.element_children() if node.parent is not None else [node]
    pool = [s for s in siblings if step.name_test in ("*", s.name)]
    if node not in pool:
        return False
    for pred in step.predicates:
        if pred.kind == "position":
            pool = pool[pred.index - 1 : pred.index] if len(pool) >= pred.index else []
        elif pred.kind == "attr-exists":
            pool = [p for p in pool if pred.name in p.attributes]
        else:
            pool = [p for p in pool if p.attributes.get(pred.name) == pred.value]
        if not any(p is node for p in pool):
            return False
    return True


def oracle_evaluate(path, context: Element):
    root = context
    while root.parent is not None:
        root = root.parent
    parents = [s for s in path.steps if s.axis == "parent"]
    named = [s for s in path.steps if s.axis != "parent"]
    base = context
    for _ in parents:
        if base.parent is None:
            raise NavigationError("above root")
        base = base.parent
    descendant = bool(named) and named[0].axis == "descendant-or-self-root"

    def member(node: Element) -> bool:
        chain = [node]
        for _ in range(len(named) - 1):
            if chain[-1].parent is None:
                return False
            chain.append(chain[-1].parent)
        chain.reverse()
        first = chain[0]
        if path.absolute:
            if first.parent is not None:
                return False
        elif not descendant and first.parent is not base:
            return False
        return all(_survives(n, s) for n, s in zip(chain, named))

    everything = []
    stack = [root]
    while stack:
        node = stack.pop()
        everything.append(node)
        stack.extend(reversed([c for c in node.children if isinstance(c, Element)]))
    result = [base] if not named else [n for n in everything if member(n)]
    if path.terminal is None:
        return result
    kind, name = path.terminal
    if kind == "attribute":
        return [n.attributes[name] for n in result if name in n.attributes]

    def text(n):
        return "".join(c.text if not isinstance(c, Element) else text(c) for c in n.children)

    return [text(n) for n in result]


NAMES = ("a", "b", "c")


def random_tree(rng: random.Random, max_nodes: int = 50) -> Element:
    root = Element(rng.choice(NAMES))
    nodes = [root]
    for _ in range(rng.randint(0, max_nodes - 1)):
        parent = rng.choice(nodes)
        child = Element(rng.choice(NAMES))
        for attr in ("x", "y"):
            if rng.random() < 0.4:
                child.attributes[attr] = rng.choice(("1", "2"))
        parent.append(child)
        nodes.append(child)
    from srml.xmltree import Text

    for node in nodes:
        if not node.children and rng.random() < 0.5:
            node.append(Text(rng.choice(("p", "q", " r "))))
    return root


def random_path(rng: random.Random) -> str:
    def step() -> str:
        text = rng.choice(NAMES + ("*",))
        for _ in range(rng.choice((0, 0, 1, 2))):
            kind = rng.choice(("pos", "has", "eq"))
            if kind == "pos":
                text += f"[{rng.randint(1, 3)}]"
            elif kind == "has":
                text += f"[@{rng.choice(('x', 'y'))}]"
            else:
                text += f'[@{rng.choice(("x", "y"))}="{rng.choice(("1", "2"))}"]'
        return text

    form = rng.choice(("descendant", "absolute", "relative"))
    steps = [step() for _ in range(rng.randint(1, 3))]
    if form == "descendant":
        path = "//" + "/".join(steps)
    elif form == "absolute":
        path = "/" + "/".join(steps)
    else:
        ups = "../" * rng.randint(0, 2)
        path = ups + "/".join(steps)
    terminal = rng.choice((None, None, "@x", "text()"))
    return path + ("/" + terminal if terminal else "")


def book_total(qty: float, price: float, discount: float, tax: float) -> float:
    return qty * price * (1 - discount / 100) * (1 + tax / 100)


def join_closure(tables: dict, references, table: str, key_col: dict, row: dict) -> set:
    """Rows reachable from the root-most ancestor of ``row``, as (table, key) pairs."""
    current_table, current = table, row
    while True:
        ref = next((r for r in references if r.child == current_table), None)
        if ref is None:
            break
        current = next(r for r in tables[ref.root] if r[ref.root_key] == current[ref.child_key])
        current_table = ref.root
    reached = {(current_table, current[key_col[current_table]])}
    changed = True
    while changed:
        changed = False
        for ref in references:
            parents = [r for r in tables[ref.root] if (ref.root, r[key_col[ref.root]]) in reached]
            for child in tables[ref.child]:
                ident = (ref.child, child[key_col[ref.child]])
                if ident not in reached and any(child[ref.child_key] == p[ref.root_key] for p in parents):
                    reached.add(ident)
                    changed = True
    return reached


def random_store(rng: random.Random, max_rows: int = 30):
    """Three tables t0..t2 joined as a random forest; returns (spec, rows by table)."""
    from srml.rules import DatabaseSpec, ReferenceSpec, TableSpec

    names = ["t0", "t1", "t2"]
    shape = rng.choice(["chain", "fan", "pair", "none"])
    refs = {
        "chain": [("t0", "t1"), ("t1", "t2")],
        "fan": [("t0", "t1"), ("t0", "t2")],
        "pair": [("t0", "t1")],
        "none": [],
    }[shape]
    references = tuple(ReferenceSpec(p, "K", c, "P") for p, c in refs)
    spec = DatabaseSpec(tuple(TableSpec(n, "K") for n in names), references)
    parent_of = {c: p for p, c in refs}
    counts = [1] + [0, 0]
    for _ in range(rng.randint(0, max_rows - 1)):
        counts[rng.randrange(3)] += 1
    rows: dict[str, list[dict]] = {}
    for name, count in zip(names, counts):
        table_rows = []
        for i in range(count):
            parent = parent_of.get(name)
            if parent is not None and not rows[parent]:
                break
            row = {"K": f"{name}-{i}", "P": rng.choice(rows[parent])["K"] if parent else "", "V": str(rng.randint(0, 9))}
            table_rows.append(row)
        rows[name] = table_rows
    return spec, rows
